import numpy as np
from scipy.integrate import quad

from hardyheat.constants import ModelParams
from hardyheat.grids import make_signed_grid
from hardyheat import hardy as H

params = ModelParams.from_delta(d=1, alpha=0.5, delta=0.1)
kappa = params.kappa
ws = H._Workspace(params, make_signed_grid(r_min=1e-3, r_max=40.0, grading=1.3))


def p_at(s, d):
    su = s ** (-2.0)
    return su * float(ws.ev.p1_fast(np.array([su * abs(d)]))[0])


def full_quad(x, y, s, tau):
    def f(zz):
        return p_at(s, x - zz) * kappa * abs(zz) ** -0.5 * p_at(tau, zz - y)

    cuts = sorted({0.0, x, y})
    total = 0.0
    for a, b in zip(cuts[:-1], cuts[1:]):
        v, _ = quad(f, a, b, limit=500)
        total += v
    lo, hi = cuts[0], cuts[-1]
    v1, _ = quad(lambda w: f(lo - np.exp(w)) * np.exp(w), -34, 13, limit=500)
    v2, _ = quad(lambda w: f(hi + np.exp(w)) * np.exp(w), -34, 13, limit=500)
    return total + v1 + v2


def full_ladder(x, y, s, tau):
    base = np.geomspace(1e-10, 400.0, 500)
    zs = np.unique(
        np.concatenate(
            [base, -base, H._peak_ladder(x, s**2), H._peak_ladder(y, tau**2)]
        )
    )
    zs = zs[np.abs(zs) > 0]
    f = ws.pvec(s, x - zs) * (kappa * np.abs(zs) ** -0.5) * ws.pvec(tau, zs - y)
    return float(np.trapezoid(f, zs))


for x, y, s, tau in [
    (0.38163, 0.82867, 0.7, 0.3),
    (0.38163, 0.82867, 0.5, 0.5),
    (0.10481, 0.10481, 0.5, 0.5),
    (5.05938, 8.48375, 0.5, 0.5),
    (0.01024, 1.07306, 0.5, 0.5),
    (0.38163, 0.82867, 0.999, 0.001),
]:
    fq = full_quad(x, y, s, tau)
    fl = full_ladder(x, y, s, tau)
    print(
        f"x={x} y={y} s={s} tau={tau}: quad={fq:.8g} ladder={fl:.8g} "
        f"rel={(fl - fq) / fq:+.2e}"
    )
