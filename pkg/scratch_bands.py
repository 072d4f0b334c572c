import numpy as np
from scipy.integrate import quad

from hardyheat.constants import ModelParams
from hardyheat.grids import make_signed_grid
from hardyheat import hardy as H

params = ModelParams.from_delta(d=1, alpha=0.5, delta=0.1)
kappa = params.kappa
a = params.alpha
ws = H._Workspace(params, make_signed_grid(r_min=1e-3, r_max=40.0, grading=1.15))

k = int(np.argmin(np.abs(ws.z - 0.105)))
l = k
x = y = float(ws.z[k])
s = tau = 0.5
z = ws.z
q = kappa * ws.absz**-a
om = ws.omega_free
Ps, Pt = ws.pmat(s), ws.pmat(tau)
q_l = q[l]


def p_at(t, d):
    return float(ws.pvec(t, np.array([d]))[0])


ps_l = p_at(s, x - y)


def f(zz):
    return (p_at(s, x - zz) - ps_l) * (kappa * abs(zz) ** -a - q_l) * p_at(tau, zz - y)


bands = [0.0, 1e-3, 0.01, 0.05, 0.2, 1.0, 5.0, 40.0]
print(f"x=y={x:.5f}  (node index {k}, r_min cell edge at 1e-3)")
print(f"{'band':>16} {'true(quad)':>12} {'grid(iii)':>12}")
tot_t = tot_g = 0.0
for lo, hi in zip(bands[:-1], bands[1:]):
    t_val = 0.0
    for sgn in (+1, -1):
        pts = sorted({max(lo, 1e-14), hi, *(v for v in (y,) if sgn > 0 and lo < v < hi)})
        for aa, bb in zip(pts[:-1], pts[1:]):
            v, _ = quad(lambda r: f(sgn * r), aa, bb, limit=300)
            t_val += v
    mask = (np.abs(z) >= lo) & (np.abs(z) < hi)
    g_val = float((om[mask] * (Ps[k, mask] - Ps[k, l]) * (q[mask] - q_l) * Pt[mask, l]).sum())
    tot_t += t_val
    tot_g += g_val
    print(f"[{lo:8.4g},{hi:8.4g}) {t_val:12.6f} {g_val:12.6f}")
print(f"{'TOTAL':>16} {tot_t:12.6f} {tot_g:12.6f}")
