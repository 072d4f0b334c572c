import math

import numpy as np
from scipy.special import roots_legendre

from hardyheat.constants import ModelParams
from hardyheat.grids import make_signed_grid
from hardyheat import hardy as H

params = ModelParams.from_delta(d=1, alpha=0.5, delta=0.1)
grid = make_signed_grid(r_min=1e-3, r_max=40.0, grading=1.3)
ws = H._Workspace(params, grid)
z, q, kappa = ws.z, ws.q, params.kappa
wts_a, om = ws.wts_alpha, ws.omega_free

k = int(np.argmin(np.abs(z - 0.38)))
l = int(np.argmin(np.abs(z - 0.83)))
x, y = z[k], z[l]
print(f"x={x:.5f} y={y:.5f}")


def grid_B(s, tau):
    """One (s, tau) node of the new assembly, full value incl. exact part."""
    Ps, Pt = ws.pmat(s), ws.pmat(tau)
    B = Ps * ws.smear_excess(tau, z)[None, :]
    B += (Ps * (kappa * wts_a)[None, :]) @ Pt
    B -= q[None, :] * ((Ps * om[None, :]) @ Pt)
    B -= Ps * ((kappa * wts_a) @ Pt - q * (om @ Pt))[None, :]
    u_row = q + ws.smear_excess(s, z) - kappa * (Ps @ wts_a)
    v_row = 1.0 - Ps @ om
    gate = ws.dist2 / (ws.dist2 + 9.0 * s ** (2 * ws.inv_alpha))
    B += gate * Pt * (u_row[:, None] - q[None, :] * v_row[:, None])
    # add back the exact CK part that free_interaction carries outside the
    # tau loop, so the number is the full B(s,tau)[k,l]
    pv = ws.pvec(s + tau, np.array([x - y]))[0]
    return B[k, l] + q[l] * pv


def brute_B(s, tau):
    base = np.geomspace(1e-10, 400.0, 500)
    zs = np.unique(
        np.concatenate(
            [
                base,
                -base,
                H._peak_ladder(x, s**ws.inv_alpha),
                H._peak_ladder(y, tau**ws.inv_alpha),
            ]
        )
    )
    zs = zs[np.abs(zs) > 0.0]
    f = ws.pvec(s, x - zs) * (kappa * np.abs(zs) ** -0.5) * ws.pvec(tau, zs - y)
    return float(np.trapezoid(f, zs))


print("\nper-(s,tau) B[k,l]: grid vs brute")
for s, tau in [
    (0.7, 0.3),
    (0.5, 0.5),
    (0.9, 0.1),
    (0.99, 0.01),
    (0.999, 0.001),
    (0.9999, 1e-4),
]:
    gb, bb = grid_B(s, tau), brute_B(s, tau)
    print(f"s={s:<7} tau={tau:<7} grid={gb:.6g}  brute={bb:.6g}  ratio={gb/bb:.4f}")

print("\nJ(1) vs dense p1:")
J = ws.free_interaction(1.0)
p1_pt = H._first_order_point(ws, 1.0, x, y)
print(f"J[k,l]={J[k,l]:.6g}  dense p1={p1_pt:.6g}  ratio={J[k,l]/p1_pt:.4f}")

# a few more probe pairs
for xa, ya in [(0.1, 0.1), (0.01, 1.0), (1.0, 3.0), (0.38, -0.83), (5.0, 8.0)]:
    ka = int(np.argmin(np.abs(z - xa)))
    la = int(np.argmin(np.abs(z - ya)))
    pa = H._first_order_point(ws, 1.0, z[ka], z[la])
    print(
        f"x={z[ka]:9.5f} y={z[la]:9.5f}  J={J[ka, la]:.6g}  p1={pa:.6g}"
        f"  ratio={J[ka, la]/pa:.4f}"
    )
