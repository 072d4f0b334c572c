"""Decompose the invariance row integral: free + inner + completion."""
import math
import sys

import numpy as np
from scipy.special import roots_legendre

from hardyheat.constants import ModelParams
from hardyheat.grids import make_signed_grid
from hardyheat.hardy import (
    _boundary_ratio,
    make_time_grid,
    solve_duhamel,
)
from hardyheat.stable import cached_evaluator

params = ModelParams.from_delta(d=1, alpha=0.5, delta=0.1)
grid = make_signed_grid(r_min=1e-3, r_max=40.0, grading=1.3)
times = make_time_grid(t_max=1.0, n_steps=16)
table = solve_duhamel(params, grid, times)
np.save("/tmp/smoke_values.npy", table.values)

ev = cached_evaluator(1, params.alpha)
z = grid.nodes
absz = np.abs(z)

for idx in [0, 3, -1]:
    t = float(table.times[idx])
    su = t ** (-1.0 / params.alpha)
    P = su * ev.p1_fast((su * np.abs(z[:, None] - z[None, :])).ravel()).reshape(
        len(z), len(z)
    )
    m = params.delta
    free = t ** (-m / params.alpha) * ev.convolve_abs_power(su * absz, power=m)
    gam = m + params.delta
    W = grid.weights_for(gam) * absz**params.delta
    inner = (table.values[idx] - P) @ W
    L = _boundary_ratio(table, idx)
    r_max = float(grid.half[-1])
    xg, wg = roots_legendre(4)
    n_pan = int(math.ceil(math.log(1e8 / r_max) / 0.75))
    edges = np.linspace(math.log(r_max), math.log(1e8), n_pan + 1)
    mid = 0.5 * (edges[:-1] + edges[1:])[:, None]
    hw = 0.5 * np.diff(edges)[:, None]
    yq = np.exp(mid + hw * xg[None, :]).ravel()
    wq = (np.exp(mid + hw * xg[None, :]) * hw * wg[None, :]).ravel()
    tail = np.zeros(len(z))
    for sign in (+1.0, -1.0):
        offs = np.abs(z[:, None] - sign * yq[None, :])
        tail += (su * ev.p1_fast((su * offs).ravel()).reshape(len(z), -1)) @ (
            wq * yq ** (-m)
        )
    target = absz ** (-params.delta)
    print(f"\n== t={t:.4f}  su={su:.4g}")
    for xq in (0.001, 0.01024, 0.10481, 1.07306, 10.99, 13.0):
        k = int(np.argmin(np.abs(z - xq)))
        tot = free[k] + inner[k] + (L[k] - 1.0) * tail[k]
        print(
            f"x={z[k]:9.4g} free={free[k]:.5f} inner={inner[k]:+.5f} "
            f"(L-1)tail={(L[k]-1.0)*tail[k]:+.5f} [L={L[k]:.3f} tail={tail[k]:.3g}] "
            f"tot={tot:.5f} target={target[k]:.5f} rel={(tot-target[k])/target[k]:+.4f}"
        )
