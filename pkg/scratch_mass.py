import numpy as np
from scipy.integrate import quad

from hardyheat.constants import ModelParams
from hardyheat.grids import make_signed_grid
from hardyheat import hardy as H

params = ModelParams.from_delta(d=1, alpha=0.5, delta=0.1)
ws = H._Workspace(params, make_signed_grid(r_min=1e-3, r_max=40.0, grading=1.3))

x = float(ws.z[np.argmin(np.abs(ws.z - 0.83))])
s = 0.5
k = int(np.argmin(np.abs(ws.z - x)))
Ps = ws.pmat(s)
om = ws.omega_free


def p_at(d):
    return float(ws.pvec(s, np.array([d]))[0])


bands = [0.0, 1e-3, 0.05, 0.3, 0.6, 1.1, 2.0, 5.0, 40.0]
print(f"row x={x:.5f} s={s}: true total mass = 1, tail beyond 40:")
tot_g = tot_t = 0.0
for lo, hi in zip(bands[:-1], bands[1:]):
    t_val = 0.0
    for sgn in (+1, -1):
        pts = sorted({lo if lo > 0 else 1e-14, hi, *(v for v in (x,) if sgn > 0 and lo < v < hi)})
        for aa, bb in zip(pts[:-1], pts[1:]):
            v, _ = quad(lambda r: p_at(x - sgn * r), aa, bb, limit=300)
            t_val += v
    mask = (np.abs(ws.z) >= lo) & (np.abs(ws.z) < hi)
    g_val = float((om[mask] * Ps[k, mask]).sum())
    tot_g += g_val
    tot_t += t_val
    print(f"[{lo:7.4g},{hi:7.4g}) true={t_val:9.6f} grid={g_val:9.6f} diff={g_val - t_val:+9.6f}")
tail_val = float(ws.om_tail @ ws.ptail(s)[k])
true_tail = 1.0 - tot_t
print(f"tail>40: true={true_tail:9.6f} aux={tail_val:9.6f}")
print(f"TOTAL grid+aux = {tot_g + tail_val:.6f}  (v_row = {1 - tot_g - tail_val:+.6f})")
