"""Radial grids, power-singular quadrature, weighted norms, extrapolation."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hardyheat.constants import sphere_area
from hardyheat.grids import (
    ExtrapolationError,
    Profile,
    extrapolate_to_zero,
    integrate_radial,
    make_radial_grid,
    make_signed_grid,
    radial_weights,
    signed_weights,
    tail_log_moment,
    tail_moment,
    tail_power_fit,
    weighted_norm,
)


@pytest.mark.parametrize("d", [1, 2, 3])
def test_ball_volume(d):
    grid = make_radial_grid(1e-3, 10.0, 256, d=d)
    vol = sphere_area(d) * float(np.sum(grid.weights))
    want = sphere_area(d) * grid.r_max**d / d
    assert vol == pytest.approx(want, rel=1e-6)


def test_grid_validation():
    with pytest.raises(ValueError):
        make_radial_grid(1.0, 0.5)
    with pytest.raises(ValueError):
        make_radial_grid(1e-3, 10.0, n_nodes=8)
    with pytest.raises(ValueError):
        make_radial_grid(1e-3, 10.0, grading=0.9)


def test_grading_ratio_controls_node_count():
    grid = make_radial_grid(1e-3, 10.0, grading=1.15, d=1)
    ratios = grid.nodes[1:] / grid.nodes[:-1]
    assert np.all(ratios < 1.15 + 1e-12)
    assert grid.grading == pytest.approx(ratios[0], rel=1e-12)


def test_log_linear_exactness():
    # the advertised exactness class: u(r) = a + b log r against r^{power}
    r = np.geomspace(0.01, 5.0, 40)
    for power in (-0.7, 0.0, 1.3):
        w = radial_weights(r, power, include_head=False)
        a, b = 0.7, -1.3
        u = a + b * np.log(r)
        got = float(w @ u)
        # int (a + b ln r) r^power dr over [r0, rN], closed form
        c = power + 1.0
        lo, hi = r[0], r[-1]
        want = a * (hi**c - lo**c) / c + b * (
            (hi**c * (math.log(hi) - 1.0 / c)) - (lo**c * (math.log(lo) - 1.0 / c))
        ) / c
        assert got == pytest.approx(want, rel=1e-13)


def test_power_integral_d1():
    # int over (0,1] of r^{-1/4} in d=1: surface factor 2, value 1/(1-1/4)
    grid = make_radial_grid(1e-3, 1.0, 1024, d=1)
    f = Profile(grid, grid.nodes**-0.25)
    got = integrate_radial(f)
    assert got == pytest.approx(2.0 / 0.75, rel=1e-5)


def test_exponential_integral_d3():
    # int e^{-|x|} dx over R^3 = omega_2 * Gamma(3) = 8 pi
    grid = make_radial_grid(1e-4, 30.0, 8192, d=3)
    f = Profile(grid, np.exp(-grid.nodes))
    got = integrate_radial(f)
    assert got == pytest.approx(8.0 * math.pi, rel=1e-5)


def test_integrate_with_singular_gamma_weight() -> None:
    # int_0^1 r^{-1/2} r^{-1/4} dr * 2 against gamma-weight machinery
    grid = make_radial_grid(1e-3, 1.0, 1024, d=1)
    f = Profile(grid, grid.nodes**-0.25)
    got = integrate_radial(f, gamma=0.5)
    assert got == pytest.approx(2.0 / 0.25, rel=1e-5)


def test_integrate_divergence_detected():
    grid = make_radial_grid(1e-4, 1.0, 256, d=1)
    f = Profile(grid, grid.nodes**-1.2)
    with pytest.raises(ValueError, match="diverge"):
        integrate_radial(f)


def test_signed_weights_power_log_exact():
    half = np.geomspace(1e-3, 50.0, 80)
    gamma = 0.75
    w = signed_weights(half, gamma)
    z = np.concatenate([-half[::-1], half])
    # u even and linear in log|z|: closed form including the central gap
    a, b = 1.1, 0.4
    u = a + b * np.log(np.abs(z))
    got = float(w @ u)
    c = 1.0 - gamma
    R = half[-1]

    def F(x):  # int_0^x (a + b ln r) r^{-gamma} dr
        return a * x**c / c + b * x**c * (math.log(x) - 1.0 / c) / c

    # exact on [r0, R] per side, plus the gap model u(r0) * gap moment
    r0 = half[0]
    want = 2.0 * (F(R) - F(r0)) + (a + b * math.log(r0)) * 2.0 * r0**c / c
    assert got == pytest.approx(want, rel=1e-12)


def test_signed_weights_reject_heavy_singularity():
    with pytest.raises(ValueError):
        signed_weights(np.geomspace(1e-3, 10, 50), 1.0)


def test_weighted_norm_q2_is_plain_l2():
    grid = make_radial_grid(1e-3, 10.0, 512, d=1)
    f = Profile(grid, np.exp(-grid.nodes))
    n2 = weighted_norm(f, 2, delta=0.25)
    # q=2 kills the weight: plain L^2 over R^1 (radial, factor 2)
    want = math.sqrt(2.0 * 0.5 * (1.0 - math.exp(-2.0 * grid.r_max)))
    assert n2 == pytest.approx(want, rel=1e-4)
    # and the weight exponent must not matter at q=2
    assert n2 == pytest.approx(weighted_norm(f, 2, delta=0.0), rel=1e-12)


def test_weighted_norm_q1_matches_weighted_integral():
    grid = make_radial_grid(1e-3, 10.0, 512, d=1)
    f = Profile(grid, 1.0 / (1.0 + grid.nodes**2))
    delta = 0.25
    n1 = weighted_norm(f, 1, delta=delta)
    direct = integrate_radial(f, gamma=delta)
    assert n1 == pytest.approx(direct, rel=1e-12)


def test_weighted_norm_infty():
    grid = make_radial_grid(1e-3, 10.0, 128, d=1)
    f = Profile(grid, grid.nodes**-0.25)
    # |f| |x|^delta == 1 identically when f = |x|^{-delta}
    assert weighted_norm(f, math.inf, delta=0.25) == pytest.approx(1.0, rel=1e-12)


def test_weighted_norm_rejects_q_below_one():
    grid = make_radial_grid(1e-3, 10.0, 64, d=1)
    f = Profile(grid, np.ones(len(grid)))
    with pytest.raises(ValueError):
        weighted_norm(f, 0.5, delta=0.1)


_sane = lambda lo, hi: st.floats(lo, hi).map(  # noqa: E731
    lambda x: 0.0 if abs(x) < 1e-3 else x  # avoid subnormal blowup under ^q
)
_profile_values = st.lists(_sane(-5.0, 5.0), min_size=48, max_size=48)


@given(v1=_profile_values, v2=_profile_values, scale=_sane(-7.0, 7.0))
@settings(max_examples=60, deadline=None)
def test_norm_properties(v1, v2, scale):
    grid = make_radial_grid(1e-3, 10.0, 48, d=1)
    f = Profile(grid, np.array(v1))
    g = Profile(grid, np.array(v2))
    fg = Profile(grid, f.values + g.values)
    cf = Profile(grid, scale * f.values)
    for q, delta in [(1, 0.25), (2, 0.1), (3, 0.25), (math.inf, 0.25)]:
        kw = {} if math.isinf(q) else {"head_exponent": 0.0}
        nf = weighted_norm(f, q, delta, **kw)
        ng = weighted_norm(g, q, delta, **kw)
        nfg = weighted_norm(fg, q, delta, **kw)
        ncf = weighted_norm(cf, q, delta, **kw)
        scale_norm = max(nf, ng, 1.0)
        assert nfg <= nf + ng + 1e-12 * scale_norm
        assert ncf == pytest.approx(abs(scale) * nf, rel=1e-12, abs=1e-300)


def test_homogeneity_with_fitted_head():
    # the fitted head exponent is scale-invariant, so homogeneity holds in
    # the default (accuracy) mode too
    grid = make_radial_grid(1e-3, 10.0, 128, d=1)
    f = Profile(grid, grid.nodes**-0.2 / (1.0 + grid.nodes**2))
    for q in (1, 2, 4):
        a = weighted_norm(Profile(grid, 3.7 * f.values), q, 0.25)
        b = 3.7 * weighted_norm(f, q, 0.25)
        assert a == pytest.approx(b, rel=1e-13)


def test_integrate_linear_monotone():
    grid = make_radial_grid(1e-3, 10.0, 128, d=2)
    f = Profile(grid, np.exp(-grid.nodes))
    g = Profile(grid, 1.0 / (1.0 + grid.nodes**4))
    lin = integrate_radial(
        Profile(grid, 2.0 * f.values + 3.0 * g.values), head_exponent=0.0
    )
    parts = 2.0 * integrate_radial(f, head_exponent=0.0) + 3.0 * integrate_radial(
        g, head_exponent=0.0
    )
    assert lin == pytest.approx(parts, rel=1e-13)
    assert integrate_radial(f) >= 0.0


class TestExtrapolateToZero:
    def test_linear_model(self):
        rs = [1e-1 / 2**k for k in range(6)]
        samples = [(r, 3.0 + r) for r in rs]
        v0, diag = extrapolate_to_zero(samples)
        assert v0 == pytest.approx(3.0, abs=1e-8)
        assert diag["gamma"] == pytest.approx(1.0, abs=1e-6)

    def test_sqrt_model(self):
        samples = [(r, 1.0 + r**0.5) for r in (1e-2, 1e-3, 1e-4)]
        v0, diag = extrapolate_to_zero(samples)
        assert v0 == pytest.approx(1.0, abs=1e-4)
        assert diag["gamma"] == pytest.approx(0.5, abs=1e-3)

    def test_needs_three_samples(self):
        with pytest.raises(ExtrapolationError, match="extrapolation unreliable"):
            extrapolate_to_zero([(0.1, 1.0), (0.01, 1.1)])

    def test_non_geometric_radii_rejected(self):
        with pytest.raises(ExtrapolationError, match="extrapolation unreliable"):
            extrapolate_to_zero([(0.1, 1.1), (0.05, 1.05), (0.002, 1.01)])

    def test_non_monotone_rejected(self):
        rs = [1e-1 / 4**k for k in range(4)]
        vals = [1.1, 0.9, 1.05, 0.97]
        with pytest.raises(ExtrapolationError, match="extrapolation unreliable"):
            extrapolate_to_zero(list(zip(rs, vals)))

    def test_wild_exponent_rejected(self):
        # v ~ r^8 differences decay far faster than the trusted window
        rs = [1e-1 / 2**k for k in range(5)]
        with pytest.raises(ExtrapolationError, match="extrapolation unreliable"):
            extrapolate_to_zero([(r, 2.0 + r**8) for r in rs])

    def test_constant_sequence(self):
        rs = [1e-1 / 2**k for k in range(4)]
        v0, diag = extrapolate_to_zero([(r, 5.5) for r in rs])
        assert v0 == 5.5
        assert diag["residual"] == 0.0


def test_tail_fit_and_moments():
    r = np.geomspace(1.0, 100.0, 60)
    C, g = tail_power_fit(r, 2.5 * r**-1.75)
    assert C == pytest.approx(2.5, rel=1e-10)
    assert g == pytest.approx(1.75, rel=1e-10)
    # int_R^inf 2.5 r^{-1.75} dr = 2.5 R^{-0.75}/0.75
    assert tail_moment(C, g, 10.0) == pytest.approx(
        2.5 * 10.0**-0.75 / 0.75, rel=1e-9
    )
    # log moment against a numerically integrated reference
    from scipy.integrate import quad

    want, _ = quad(lambda x: 2.5 * x**-1.75 * math.log(x), 10.0, np.inf)
    assert tail_log_moment(C, g, 10.0) == pytest.approx(want, rel=1e-8)
    with pytest.raises(ValueError):
        tail_moment(1.0, 0.5, 10.0)


def test_profile_serialization_round_trip():
    grid = make_radial_grid(1e-2, 5.0, 32, d=1)
    f = Profile(grid, np.exp(-grid.nodes), label="demo")
    back = Profile.from_csv(f.to_csv(), d=1, label="demo")
    np.testing.assert_allclose(back.grid.nodes, grid.nodes, rtol=1e-15)
    np.testing.assert_allclose(back.values, f.values, rtol=1e-15)
    blob = f.to_json()
    assert '"label": "demo"' in blob


def test_signed_grid_structure():
    sg = make_signed_grid(1e-3, 60.0, 1.15)
    z = sg.nodes
    assert len(z) == 2 * sg.n_half
    np.testing.assert_allclose(z, -z[::-1], rtol=0, atol=0)
    assert sg.index_of(sg.half[3]) == sg.n_half + 3
    assert sg.index_of(-sg.half[0]) == sg.n_half - 1
    with pytest.raises(KeyError):
        sg.index_of(0.1234567)
