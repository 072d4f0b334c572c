import numpy as np
from scipy.special import roots_legendre

from hardyheat.constants import ModelParams
from hardyheat.grids import make_radial_grid, radial_weights
from hardyheat.selfsimilar import _interp_rows
from hardyheat.stable import cached_evaluator

params = ModelParams.from_delta(d=1, alpha=0.5, delta=0.1)
grid = make_radial_grid(r_min=1e-4, r_max=1e4, grading=1.15, d=1)
ev = cached_evaluator(1, params.alpha)
d, alpha, delta, kappa = 1, params.alpha, params.delta, params.kappa
gam = alpha + delta
c_tail = d + alpha - 2.0 * delta

r = grid.nodes
n = len(r)
i_probe = 40
x = r[i_probe]
print("x =", x)

h = r**-delta

u = np.geomspace(1e-7, 1e6, 1560)
w_rad = radial_weights(u, d - 1.0 - gam)
E = _interp_rows(u, r, head_expo=0.0, tail_expo=c_tail)
B = w_rad[:, None] * E * (r**delta)[None, :]
bg = w_rad * u**gam

# exact inner integrand as a function of s, after w -> z = s^{1/a} w:
#   inner(s) = s^{(d+a-g)/a} (1-s)^{-g/a} CAP(x (1-s)^{-1/a}, g),  g = a + d
def inner_exact(s):
    om = 1.0 - s
    return (
        s ** ((delta + alpha - 1.0) / alpha)
        * om ** (-(delta + alpha) / alpha)
        * float(ev.convolve_abs_power(np.array([x * om ** (-1.0 / alpha)]), delta + alpha)[0])
    )

xg, wg = roots_legendre(10)
v_floor = min(2e-4, 0.2 * (delta / alpha) * grid.r_min**alpha)
gaps = [0.5]
while gaps[-1] > v_floor:
    gaps.append(gaps[-1] / 2.0)
edges = np.concatenate([[0.0], 1.0 - np.asarray(gaps), [1.0]])

tot_code = 0.0
tot_exact = 0.0
rows = []
for p in range(len(edges) - 1):
    mid = 0.5 * (edges[p] + edges[p + 1])
    hw = 0.5 * (edges[p + 1] - edges[p])
    pan_direct = pan_peel = pan_exact = 0.0
    for node, wq in zip(xg, wg):
        v = mid + hw * node
        s = v ** (alpha / delta)
        su = (1.0 - s) ** (-1.0 / alpha)
        sc = s ** (1.0 / alpha)
        Prow = su * ev.p1_fast(su * np.abs(x - sc * u))
        Prow += su * ev.p1_fast(su * (x + sc * u))
        direct = float(Prow @ (B @ h))
        wstar = x / sc
        Rrow = (
            wstar ** (-gam)
            * _interp_rows(np.array([wstar]), r, head_expo=0.0, tail_expo=c_tail)[0]
            * r**delta
        )
        peel = float((s ** (-d / alpha) - Prow @ bg) * (Rrow @ h))
        ex = inner_exact(s)
        pan_direct += wq * hw * direct
        pan_peel += wq * hw * peel
        pan_exact += wq * hw * ex
        tot_code += wq * hw * (direct + peel)
        tot_exact += wq * hw * ex
    rows.append((p, 1.0 - edges[p + 1], pan_direct, pan_peel, pan_exact))

print(f"{'panel':>5} {'1-v_hi':>10} {'direct':>12} {'peel':>12} {'exact':>12}")
for p, gap, dv, pv, exv in rows:
    print(f"{p:>5} {gap:>10.3g} {dv:>12.5g} {pv:>12.5g} {exv:>12.5g}")

scale = kappa * alpha / delta
print("total code :", scale * tot_code)
print("total exact:", scale * tot_exact)
