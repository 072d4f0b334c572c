"""Smoke solve on the reduced test grid: invariance + mass + residual."""
import time

import numpy as np

from hardyheat.constants import ModelParams
from hardyheat.grids import make_signed_grid
from hardyheat.hardy import (
    invariance_defect,
    make_time_grid,
    mass_defect,
    ptilde_at,
    solve_duhamel,
)

params = ModelParams.from_delta(d=1, alpha=0.5, delta=0.1)
grid = make_signed_grid(r_min=1e-3, r_max=40.0, grading=1.3)
times = make_time_grid(t_max=1.0, n_steps=16)
print(f"n_half={grid.n_half} n={len(grid)} M={len(times)} kappa={params.kappa:.6f}")

t0 = time.time()
table = solve_duhamel(params, grid, times)
print(f"solve: {time.time() - t0:.1f}s  sweeps={table.meta['sweeps'][:4]}...{table.meta['sweeps'][-2:]}")
print(f"max_sweep_defect={table.meta['max_sweep_defect']:.2e} clipped={table.meta['clipped']:.2e}")
print(f"df2_residual={table.meta['df2_residual']:.4f}")

for idx in (0, 3, 7, 11, -1):
    inv = invariance_defect(table, time_index=idx)
    print(f"t={inv['t']:.4f}  invariance defect={inv['defect']:.4f} at x={inv['x']:.4g}")

md = mass_defect(table)
print(f"mass excess at t=1: [{md['min_excess']:.4f}, {md['max_excess']:.4f}]")

v = ptilde_at(table, 1.0, 0.38163, 0.82867)
z = grid.nodes
k = int(np.argmin(np.abs(z - 0.38163)))
l = int(np.argmin(np.abs(z - 0.82867)))
print(f"ptilde(1, .38163, .82867) = {v:.6f}   table[{k},{l}]={table.values[-1][k, l]:.6f}")
print("dense p1 + excess J-check value was 0.0249714 + higher orders")
