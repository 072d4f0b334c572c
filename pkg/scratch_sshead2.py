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
x = r[0]
print("x =", x)


def psi_start(w):
    return (1.0 + w**-delta) * np.minimum(1.0, w ** (-d - alpha))


start = psi_start(r)

u = np.geomspace(1e-7, 1e6, 1560)
w_rad = radial_weights(u, d - 1.0 - gam)
E = _interp_rows(u, r, head_expo=0.0, tail_expo=c_tail)
B = w_rad[:, None] * E * (r**delta)[None, :]
bg = w_rad * u**gam

# brute: subtract the ridge amplitude, integrate the smooth remainder on a
# very dense grid, add the amplitude's exact kernel mass back
wb = np.geomspace(1e-9, 1e7, 60000)
fb = psi_start(wb) * wb**-alpha
lw = np.log(wb)
trap = np.zeros_like(wb)
trap[1:-1] = 0.5 * (lw[2:] - lw[:-2])
trap[0] = 0.5 * (lw[1] - lw[0])
trap[-1] = 0.5 * (lw[-1] - lw[-2])
wtrap = trap * wb  # log-trapezoid: sum f * w ~ int f dw


def inner_brute(s):
    su = (1.0 - s) ** (-1.0 / alpha)
    sc = s ** (1.0 / alpha)
    wstar = x / sc
    amp = psi_start(wstar) * wstar**-alpha
    P = su * ev.p1_fast(su * np.abs(x - sc * wb)) + su * ev.p1_fast(
        su * (x + sc * wb)
    )
    smooth = float(((fb - amp) * P) @ wtrap)
    return smooth + amp * s ** (-1.0 / alpha)


xg, wg = roots_legendre(10)
v_floor = min(2e-4, 0.2 * (delta / alpha) * grid.r_min**alpha)
gaps = [0.5]
while gaps[-1] > v_floor:
    gaps.append(gaps[-1] / 2.0)
edges = np.concatenate([[0.0], 1.0 - np.asarray(gaps), [1.0]])

Bh = B @ start
Rh_cache = None
print(f"{'panel':>5} {'1-v_hi':>9} {'direct':>12} {'peel':>12} {'code':>12} {'brute':>12}")
tot_code = tot_brute = 0.0
for p in range(len(edges) - 1):
    mid = 0.5 * (edges[p] + edges[p + 1])
    hw = 0.5 * (edges[p + 1] - edges[p])
    pd = pp = pb = 0.0
    for node, wq in zip(xg, wg):
        v = mid + hw * node
        s = v ** (alpha / delta)
        su = (1.0 - s) ** (-1.0 / alpha)
        sc = s ** (1.0 / alpha)
        Prow = su * ev.p1_fast(su * np.abs(x - sc * u))
        Prow += su * ev.p1_fast(su * (x + sc * u))
        direct = float(Prow @ Bh)
        wstar = x / sc
        Rrow = (
            wstar ** (-gam)
            * _interp_rows(np.array([wstar]), r, head_expo=0.0, tail_expo=c_tail)[0]
            * r**delta
        )
        peel = float((s ** (-d / alpha) - Prow @ bg) * (Rrow @ start))
        br = inner_brute(s)
        pd += wq * hw * direct
        pp += wq * hw * peel
        pb += wq * hw * br
    tot_code += pd + pp
    tot_brute += pb
    print(
        f"{p:>5} {1.0 - edges[p + 1]:>9.3g} {pd:>12.5g} {pp:>12.5g} "
        f"{pd + pp:>12.5g} {pb:>12.5g}"
    )

scale = kappa * alpha / delta
print("row total code :", scale * tot_code)
print("row total brute:", scale * tot_brute)
print("start(x):", psi_start(x))
