import sys

import numpy as np
from scipy.integrate import quad

from hardyheat.constants import ModelParams
from hardyheat.grids import make_signed_grid
from hardyheat import hardy as H

params = ModelParams.from_delta(d=1, alpha=0.5, delta=0.1)
kappa = params.kappa
a = params.alpha
ws = H._Workspace(params, make_signed_grid(r_min=1e-3, r_max=40.0, grading=1.3))

tx, ty = float(sys.argv[1]), float(sys.argv[2])  # row coord, subtraction col
s, tau = float(sys.argv[3]), float(sys.argv[4])
k = int(np.argmin(np.abs(ws.z - tx)))
l = int(np.argmin(np.abs(ws.z - ty)))
x, y = float(ws.z[k]), float(ws.z[l])
z = ws.z
q = ws.q
wts_a = kappa * ws.wts_alpha
om = ws.omega_free
Ps, Pt = ws.pmat(s), ws.pmat(tau)
q_l = q[l]


def p_at(t, d):
    return float(ws.pvec(t, np.array([d]))[0])


ps_l = p_at(s, x - y)
exact = q_l * p_at(s + tau, x - y)

ii = Ps[k, l] * float(ws.smear_excess(tau, np.array([y]))[0])
iii = float((om * (Ps[k] - Ps[k, l]) * (q - q_l) * Pt[:, l]).sum())
Pst = ws.ptail(s)
Ptt_col = ws.ptail(tau)[l]  # p(tau, z_tail - y) by symmetry of distance
iii_t = float((ws.om_tail * (Pst[k] - Ps[k, l]) * (ws.q_tail - q_l) * Ptt_col).sum())
u_row = q + ws.smear_excess(s, z) - Ps @ wts_a - Pst @ ws.omq_tail
v_row = 1.0 - Ps @ om - Pst @ ws.om_tail
gate = ws.dist2 / (ws.dist2 + 9.0 * s ** (2 * ws.inv_alpha))
iv = gate[k, l] * Pt[k, l] * (u_row[k] - q_l * v_row[k])


def f(zz):
    return (p_at(s, x - zz) - ps_l) * (kappa * abs(zz) ** -a - q_l) * p_at(tau, zz - y)


pieces = sorted({-abs(y), 0.0, abs(y), x, y})
total = 0.0
for aa, bb in zip(pieces[:-1], pieces[1:]):
    if bb - aa < 1e-14:
        continue
    v, _ = quad(f, aa, bb, limit=400)
    total += v
v1, _ = quad(lambda w: f(pieces[0] - np.exp(w)) * np.exp(w), -30, 14, limit=400)
v2, _ = quad(lambda w: f(pieces[-1] + np.exp(w)) * np.exp(w), -30, 14, limit=400)
true_dbl = total + v1 + v2

E_code = float(ws.smear_excess(tau, np.array([y]))[0])
brute_full = None
base = np.geomspace(1e-10, 400.0, 500)
zs = np.unique(np.concatenate([base, -base, H._peak_ladder(x, s ** (1 / a)), H._peak_ladder(y, tau ** (1 / a))]))
zs = zs[np.abs(zs) > 0]
fv = ws.pvec(s, x - zs) * (kappa * np.abs(zs) ** -a) * ws.pvec(tau, zs - y)
brute_full = float(np.trapezoid(fv, zs))

print(f"row x={x:.5f}, subtract col y={y:.5f}, s={s}, tau={tau}")
print(f"exact            = {exact:.6f}")
print(f"grid (ii) smear  = {ii:.6f}   [Ps_kl={Ps[k, l]:.5f} E={E_code:.6f}]")
print(f"grid (iii) dbl   = {iii:.6f}  tail={iii_t:.6f}")
print(f"grid (iv) repair = {iv:.6f}   [gate={gate[k, l]:.3f} Pt_kl={Pt[k, l]:.5f}")
print(f"                    u_row={u_row[k]:.6f} q_l*v_row={q_l * v_row[k]:.6f}]")
print(f"true dbl-sub     = {true_dbl:.6f}")
print(f"grid total       = {exact + ii + iii + iii_t + iv:.6f}")
print(f"brute total      = {brute_full:.6f}")
print(f"identity: true_rem - ps_l*E = {brute_full - exact - ps_l * E_code:.6f} (cmp true_dbl + iv-target)")
