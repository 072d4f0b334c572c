import numpy as np

from hardyheat.constants import ModelParams
from hardyheat.grids import make_radial_grid, tail_power_fit
from hardyheat.selfsimilar import (
    potential_constant,
    psi1_fixed_point,
    solve_self_similar,
)

params = ModelParams.from_delta(d=1, alpha=0.5, delta=0.1)
grid = make_radial_grid(r_min=1e-4, r_max=1e4, grading=1.15, d=1)
prof = psi1_fixed_point(params, grid, tol=1e-7)
print("sweeps:", prof.meta["sweeps"])
res = prof.meta["residuals"]
print("residuals head/tail:", res[:3], res[-3:])
print("drift:", prof.meta["normalization_drift"])

r = grid.nodes
v = prof.values
# head exponent from the innermost decade
lo = r <= 1e-3
ch, _ = np.polyfit(np.log(r[lo]), np.log(v[lo]), 1), None
print("head exponent fit (target -0.1):", ch[0])
amp, expo = tail_power_fit(r, v)
print("tail exponent (target 1.4):", expo, "amp:", amp)

sol = solve_self_similar(params, grid)
pc = potential_constant(sol)
print("potential ratio (target 1):", pc["ratio"], pc)
