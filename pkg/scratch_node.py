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
wts_a = kappa * ws.wts_alpha
om = ws.omega_free
Ps, Pt = ws.pmat(s), ws.pmat(tau)

q_l = q[l]


def p_at(t, d):
    return float(ws.pvec(t, np.array([d]))[0])


exact = q_l * p_at(s + tau, x - y)

# grid pieces
ii = Ps[k, l] * float(ws.smear_excess(tau, np.array([y]))[0])
iii = float(
    (om * (Ps[k] - Ps[k, l]) * (q - q_l) * Pt[:, l]).sum()
)
u_row = q + ws.smear_excess(s, z) - Ps @ wts_a
v_row = 1.0 - Ps @ om
gate = ws.dist2 / (ws.dist2 + 9.0 * s ** (2 * ws.inv_alpha))
iv = gate[k, l] * Pt[k, l] * (u_row[k] - q_l * v_row[k])

# true remainder via quad: int ps(x-z)(q(z)-q_l)pt(z-y) dz
def f(zz):
    return p_at(s, x - zz) * (kappa * abs(zz) ** -a - q_l) * p_at(tau, zz - y)

cuts = [-y, 0.0, y]
total = 0.0
for aa, bb in zip(cuts[:-1], cuts[1:]):
    v, _ = quad(f, aa, bb, limit=400, points=[0.0] if aa < 0 < bb else None)
    total += v
v1, _ = quad(lambda w: f(-y - np.exp(w)) * np.exp(w), -30, 10, limit=400)
v2, _ = quad(lambda w: f(y + np.exp(w)) * np.exp(w), -30, 10, limit=400)
true_rem = total + v1 + v2

# also the pure smear companion term value ps(x-y)*E_tau(y)
E_tau_quad_1, _ = quad(
    lambda zz: (kappa * abs(zz) ** -a - q_l) * p_at(tau, zz - y), -y, y,
    limit=400, points=[0.0],
)
E2, _ = quad(lambda w: (kappa * (y + np.exp(w)) ** -a - q_l) * p_at(tau, np.exp(w)) * np.exp(w), -30, 10, limit=400)
E3, _ = quad(lambda w: (kappa * abs(-y - np.exp(w)) ** -a - q_l) * p_at(tau, -y - np.exp(w) - y) * np.exp(w), -30, 10, limit=400)
E_tau_quad = E_tau_quad_1 + E2 + E3
smear_code = float(ws.smear_excess(tau, np.array([y]))[0])

print(f"pair x=y={x:.5f}, s=tau=0.5, q_l={q_l:.5f}")
print(f"exact           = {exact:.6f}")
print(f"grid (ii) smear = {ii:.6f}   [Ps_kl={Ps[k, l]:.5f} * E={smear_code:.6f}]")
print(f"  E_tau: code={smear_code:.6f}  quad={E_tau_quad:.6f}")
print(f"grid (iii) dbl  = {iii:.6f}")
print(f"grid (iv) rep   = {iv:.6f}  [gate={gate[k, l]:.3f}]")
print(f"grid remainder  = {ii + iii + iv:.6f}")
print(f"true remainder  = {true_rem:.6f}")
print(f"true ps(x-y)*E  = {p_at(s, 0.0) * E_tau_quad:.6f}")
print(f"true dbl-sub    = {true_rem - p_at(s, 0.0) * E_tau_quad:.6f}")
print(f"grid total      = {exact + ii + iii + iv:.6f}")
print(f"brute/quad tot  = {exact + true_rem:.6f}")
