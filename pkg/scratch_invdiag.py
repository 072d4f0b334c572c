"""x=r_min row: J grid vs dense, R vs J+J2, and the repaired invariance."""
import numpy as np

from hardyheat.constants import ModelParams
from hardyheat.grids import make_signed_grid
from hardyheat.hardy import (
    KernelTable,
    _first_order_point,
    _second_order_point,
    _Workspace,
    invariance_defect,
    make_time_grid,
)

params = ModelParams.from_delta(d=1, alpha=0.5, delta=0.1)
grid = make_signed_grid(r_min=1e-3, r_max=40.0, grading=1.3)
times = make_time_grid(t_max=1.0, n_steps=16)
values = np.load("/tmp/smoke_values.npy")
table = KernelTable(params=params, grid=grid, times=times, values=values, meta={})

z = grid.nodes
k0 = int(np.argmin(np.abs(z - 1e-3)))
print(f"row k0={k0} z={z[k0]:.4g}")

ws = _Workspace(params, grid)
J = ws.free_interaction(1.0)
P = ws.pmat(1.0)
R = values[-1] - P

cols = [int(np.argmin(np.abs(z - y))) for y in (0.0024, 0.0248, 0.105, 0.382, 1.073, 3.017, 8.48)]
print("\nJ(1, r_min, y): grid vs dense")
for c in cols:
    dense = _first_order_point(ws, 1.0, float(z[k0]), float(z[c]))
    print(
        f"y={z[c]:9.4g}  J_grid={J[k0, c]:.6g}  J_dense={dense:.6g} "
        f"rel={(J[k0, c] - dense) / dense:+.4f}"
    )

print("\nR vs J+J2 at the same columns")
for c in cols:
    j2 = _second_order_point(ws, 1.0, float(z[k0]), float(z[c]))
    lead = J[k0, c] + j2
    print(
        f"y={z[c]:9.4g}  R={R[k0, c]:.6g}  J+J2={lead:.6g} "
        f"(J2/J={j2 / J[k0, c]:.3f})  R/(J+J2)={R[k0, c] / lead:.4f}"
    )

print("\nrepaired invariance defects")
for idx in (0, 3, 7, -1):
    inv = invariance_defect(table, time_index=idx)
    print(f"t={inv['t']:.4f}  defect={inv['defect']:.4f} at x={inv['x']:.4g}")
