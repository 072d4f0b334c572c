import numpy as np

from hardyheat.constants import ModelParams
from hardyheat.grids import make_signed_grid
from hardyheat import hardy as H

params = ModelParams.from_delta(d=1, alpha=0.5, delta=0.1)
grid = make_signed_grid(r_min=1e-3, r_max=40.0, grading=1.3)
ws = H._Workspace(params, grid)
z, q, kappa = ws.z, ws.q, params.kappa
wts_a, om = ws.wts_alpha, ws.omega_free


def ladder(center, width):
    return H._peak_ladder(center, width)


def dense_zs(x, y, s, tau):
    base = np.geomspace(1e-10, 400.0, 500)
    zs = np.unique(
        np.concatenate(
            [base, -base, ladder(x, s**ws.inv_alpha), ladder(y, tau**ws.inv_alpha)]
        )
    )
    return zs[np.abs(zs) > 0.0]


def pieces(k, l, s, tau):
    x, y = z[k], z[l]
    zs = dense_zs(x, y, s, tau)
    ps_d = ws.pvec(s, x - zs)
    pt_d = ws.pvec(tau, zs - y)
    qd = kappa * np.abs(zs) ** -0.5
    ps_xy = float(ws.pvec(s, np.array([x - y]))[0])
    # brute pieces
    b_full = float(np.trapezoid(ps_d * qd * pt_d, zs))
    b_ck = q[l] * float(ws.pvec(s + tau, np.array([x - y]))[0])
    b_smear = ps_xy * float(np.trapezoid((qd - q[l]) * pt_d, zs))
    b_rough2 = float(np.trapezoid((ps_d - ps_xy) * (qd - q[l]) * pt_d, zs))
    # grid pieces
    Ps, Pt = ws.pmat(s), ws.pmat(tau)
    g_smear = Ps[k, l] * ws.smear_excess(tau, z)[l]
    giii = (
        float((Ps[k] * kappa * wts_a) @ Pt[:, l])
        - q[l] * float((Ps[k] * om) @ Pt[:, l])
        - Ps[k, l] * float((kappa * wts_a) @ Pt[:, l])
        + Ps[k, l] * q[l] * float(om @ Pt[:, l])
    )
    u_k = q[k] + ws.smear_excess(s, z)[k] - kappa * float(Ps[k] @ wts_a)
    v_k = 1.0 - float(Ps[k] @ om)
    gate = ws.dist2[k, l] / (ws.dist2[k, l] + 9.0 * s ** (2 * ws.inv_alpha))
    giv = gate * Pt[k, l] * (u_k - q[l] * v_k)
    print(
        f"  s={s} tau={tau}\n"
        f"    smear:  grid={g_smear:.6g} brute={b_smear:.6g}"
        f" diff={g_smear - b_smear:+.3g}\n"
        f"    rough2: grid(iii)={giii:.6g} repair(iv)={giv:.6g}"
        f" sum={giii + giv:.6g} brute={b_rough2:.6g}"
        f" diff={giii + giv - b_rough2:+.3g}\n"
        f"    total:  grid={b_ck + g_smear + giii + giv:.6g}"
        f" brute={b_full:.6g} (gate={gate:.3f}, ungated iv="
        f"{Pt[k, l] * (u_k - q[l] * v_k):.6g})"
    )


for ka, la in [(0.38, 0.83), (0.1, 0.1), (0.01, 1.07), (5.0, 8.4)]:
    k = int(np.argmin(np.abs(z - ka)))
    l = int(np.argmin(np.abs(z - la)))
    print(f"pair x={z[k]:.5f} y={z[l]:.5f}")
    for s, tau in [(0.7, 0.3), (0.5, 0.5), (0.9, 0.1)]:
        pieces(k, l, s, tau)
