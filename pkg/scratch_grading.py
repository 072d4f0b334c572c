import numpy as np

from hardyheat.constants import ModelParams
from hardyheat.grids import make_signed_grid
from hardyheat import hardy as H

params = ModelParams.from_delta(d=1, alpha=0.5, delta=0.1)
kappa = params.kappa

TARGETS = [(0.38, 0.83), (0.105, 0.105), (0.01, 1.07), (5.1, 8.5)]
NODES = [(0.7, 0.3), (0.5, 0.5), (0.9, 0.1)]


def grid_B(ws, s, tau, k, l):
    z = ws.z
    q = kappa * ws.absz ** -params.alpha
    wts_a = kappa * ws.wts_alpha
    om = ws.omega_free
    Ps, Pt = ws.pmat(s), ws.pmat(tau)
    Ms = ws.cell_masses(s)
    B = Ps * ws.smear_excess(tau, z)[None, :]
    B += (Ms * ws.qbar[None, :]) @ Pt
    B -= ws.qbar[None, :] * (Ms @ Pt)
    B += (ws.qbar - q)[None, :] * ws.pmat(s + tau)
    B -= Ps * (wts_a @ Pt - q * (om @ Pt))[None, :]
    Pst, Ptt = ws.ptail(s), ws.ptail(tau).T
    B += (Pst * ws.omq_tail[None, :]) @ Ptt
    B -= q[None, :] * ((Pst * ws.om_tail[None, :]) @ Ptt)
    B -= Ps * (ws.omq_tail @ Ptt - q * (ws.om_tail @ Ptt))[None, :]
    u_row = q + ws.smear_excess(s, z) - Ms @ ws.qbar - Pst @ ws.omq_tail
    v_row = 1.0 - Ms.sum(axis=1) - Pst @ ws.om_tail
    gate = ws.dist2 / (ws.dist2 + 9.0 * s ** (2 * ws.inv_alpha))
    B += gate * Pt * (u_row[:, None] - q[None, :] * v_row[:, None])
    return B[k, l]


def brute_B(ws, s, tau, x, y):
    base = np.geomspace(1e-10, 400.0, 500)
    zs = np.unique(
        np.concatenate(
            [base, -base, H._peak_ladder(x, s ** (1 / params.alpha)),
             H._peak_ladder(y, tau ** (1 / params.alpha))]
        )
    )
    zs = zs[np.abs(zs) > 0]
    f = ws.pvec(s, x - zs) * (kappa * np.abs(zs) ** -params.alpha) * ws.pvec(tau, zs - y)
    return float(np.trapezoid(f, zs))


for grading in (1.3, 1.15, 1.08):
    ws = H._Workspace(params, make_signed_grid(r_min=1e-3, r_max=40.0, grading=grading))
    print(f"--- grading={grading} n={ws.z.size} dlog2={np.log(grading)**2:.5f}")
    for tx, ty in TARGETS:
        k = int(np.argmin(np.abs(ws.z - tx)))
        l = int(np.argmin(np.abs(ws.z - ty)))
        x, y = float(ws.z[k]), float(ws.z[l])
        row = []
        for s, tau in NODES:
            exact = (
                kappa * abs(y) ** -params.alpha
                * float(ws.pvec(s + tau, np.array([x - y]))[0])
            )
            g = exact + grid_B(ws, s, tau, k, l)
            b = brute_B(ws, s, tau, x, y)
            row.append(f"{(g - b) / b:+.4f}")
        print(f"  x={x:.4f} y={y:.4f}: " + "  ".join(row))
