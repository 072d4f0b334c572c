import numpy as np
from scipy.integrate import quad

from hardyheat.constants import ModelParams
from hardyheat.grids import make_signed_grid
from hardyheat import hardy as H

params = ModelParams.from_delta(d=1, alpha=0.5, delta=0.1)
kappa = params.kappa

ws = H._Workspace(params, make_signed_grid(r_min=1e-3, r_max=40.0, grading=1.3))


def smear_quad(tau, y):
    su = tau ** (-2.0)

    def f(zz):
        return (
            kappa * (abs(zz) ** -0.5 - abs(y) ** -0.5)
            * su
            * float(ws.ev.p1_fast(np.array([su * abs(zz - y)]))[0])
        )

    total = 0.0
    # split at the singular point, the peak, and a far cut; infinite tails
    # via power substitution
    cuts = sorted({0.0, y, -5.0 * abs(y), 5.0 * abs(y) + 5.0, y - 1e-6, y + 1e-6})
    for a, b in zip(cuts[:-1], cuts[1:]):
        v, _ = quad(f, a, b, limit=400, points=None)
        total += v
    lo, hi = cuts[0], cuts[-1]
    v1, _ = quad(lambda w: f(lo - np.exp(w)) * np.exp(w), -30, 12, limit=400)
    v2, _ = quad(lambda w: f(hi + np.exp(w)) * np.exp(w), -30, 12, limit=400)
    return total + v1 + v2


for tau, y in [(0.5, 8.48375), (0.3, 0.82867), (0.5, 0.10481), (0.1, 0.82867)]:
    e_ws = float(ws.smear_excess(tau, np.array([y]))[0])
    e_q = smear_quad(tau, y)
    zs = np.unique(
        np.concatenate(
            [
                np.geomspace(1e-10, 400.0, 500),
                -np.geomspace(1e-10, 400.0, 500),
                H._peak_ladder(y, tau**2),
            ]
        )
    )
    zs = zs[np.abs(zs) > 0]
    e_tr = float(
        np.trapezoid(
            kappa * (np.abs(zs) ** -0.5 - abs(y) ** -0.5) * ws.pvec(tau, zs - y),
            zs,
        )
    )
    print(
        f"tau={tau} y={y}: smear_excess={e_ws:+.6g} quad={e_q:+.6g} "
        f"ladder={e_tr:+.6g}"
    )
