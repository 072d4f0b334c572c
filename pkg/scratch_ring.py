import numpy as np

from hardyheat.constants import ModelParams
from hardyheat.hardy import _Workspace, make_signed_grid

params = ModelParams.from_delta(d=1, alpha=0.5, delta=0.1)
grid = make_signed_grid(r_min=1e-3, r_max=40.0, grading=1.3)
ws = _Workspace(params, grid)

k0 = int(np.argmin(np.abs(ws.z - 1e-3)))
rows = ws.dense_inner_interaction(1.0, np.array([k0]))

# frozen dense-oracle values of J(1, 0.001, y) from the earlier diagnostic
ref = {
    0.002171: 0.742303,
    0.02223: 0.580978,
    0.1048: 0.343604,
    0.3816: 0.127285,
    1.073: 0.0414214,
    3.017: 0.0112367,
    8.484: 0.00274364,
}
for y, jd in ref.items():
    c = int(np.argmin(np.abs(ws.z - y)))
    print(
        f"y={ws.z[c]:10.4g}  new={rows[0, c]:10.6g}  oracle={jd:10.6g}  "
        f"ratio={rows[0, c] / jd:.4f}"
    )
