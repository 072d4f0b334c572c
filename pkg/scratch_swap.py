import numpy as np

from hardyheat.constants import ModelParams
from hardyheat.grids import make_signed_grid
from hardyheat import hardy as H
from scratch_grading import grid_B, brute_B

params = ModelParams.from_delta(d=1, alpha=0.5, delta=0.1)
ws = H._Workspace(params, make_signed_grid(r_min=1e-3, r_max=40.0, grading=1.3))

for tx, ty in [(0.01, 1.07), (1.07, 3.02), (0.38, 0.83)]:
    k = int(np.argmin(np.abs(ws.z - tx)))
    l = int(np.argmin(np.abs(ws.z - ty)))
    x, y = float(ws.z[k]), float(ws.z[l])
    print(f"x={x:.5f} y={y:.5f}  [narrow side at x: row y, col x]")
    for s, tau in [(0.5, 0.5), (0.7, 0.3), (0.9, 0.1), (0.99, 0.01), (0.999, 0.001)]:
        g = grid_B(ws, s, tau, l, k)
        b = brute_B(ws, s, tau, y, x)
        print(f"  s={s:<6} tau={tau:<6} grid={g:.6g} brute={b:.6g} rel={(g - b) / b:+.4f}")
