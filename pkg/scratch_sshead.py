import numpy as np

from hardyheat.constants import ModelParams
from hardyheat.grids import make_radial_grid
from hardyheat.selfsimilar import duhamel_matrix
from hardyheat.stable import cached_evaluator

params = ModelParams.from_delta(d=1, alpha=0.5, delta=0.1)
grid = make_radial_grid(r_min=1e-4, r_max=1e4, grading=1.15, d=1)
ev = cached_evaluator(1, params.alpha)
r = grid.nodes

T = duhamel_matrix(params, grid)
start = (1.0 + r**-params.delta) * np.minimum(1.0, r ** (-1 - params.alpha))

out = T @ start
print("input head values :", start[:8])
print("output head values:", out[:8])
print("output mid/tail   :", out[40], out[80], out[-5])
slopes = np.diff(np.log(out[:10])) / np.diff(np.log(r[:10]))
print("local slopes (head):", slopes)

# iterate a few more times without normalization safeguards, watch the head
cur = out / out[40]
for k in range(4):
    cur = T @ cur
    cur = cur / cur[40]
    sl = np.diff(np.log(cur[:6])) / np.diff(np.log(r[:6]))
    print(f"sweep {k + 2}: head slopes {sl}  v[0]={cur[0]:.5g}")
