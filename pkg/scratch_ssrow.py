import numpy as np

from hardyheat.constants import ModelParams
from hardyheat.grids import make_radial_grid
from hardyheat.selfsimilar import duhamel_matrix
from hardyheat.stable import cached_evaluator

params = ModelParams.from_delta(d=1, alpha=0.5, delta=0.1)
grid = make_radial_grid(r_min=1e-4, r_max=1e4, grading=1.15, d=1)
ev = cached_evaluator(1, params.alpha)

T = duhamel_matrix(params, grid)
r = grid.nodes
h = r**-params.delta
got = T @ h

# exact: kappa * int_0^1 int p(1-s, x - s^{1/a} w) |w|^{-d-a} dw ds
#      = |x|^{-d} - (p_1 * |.|^{-d})(x)   [Duhamel identity for the
#        invariant weight, single application]
exact = h - ev.convolve_abs_power(r, params.delta)

for i in [0, 5, 20, 40, 60, 80, 100, 120, len(r) - 10]:
    print(
        f"x={r[i]:10.4g}  got={got[i]:12.6g}  exact={exact[i]:12.6g}  "
        f"ratio={got[i] / exact[i]:.6f}"
    )
