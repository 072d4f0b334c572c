"""Coupling/constant identities against high-precision references.

Expected values were frozen from a 50-digit arithmetic session (mpmath)
before the implementation existed; they are the independent route.
"""

import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hardyheat.constants import (
    ModelParams,
    c_beta,
    delta_of_kappa,
    kappa_derivative,
    kappa_of_delta,
    kappa_star,
    levy_prefactor,
    riesz_constant,
    sphere_area,
)

# (d, alpha, delta) -> kappa, 50-digit reference
FROZEN_KAPPA = [
    (1, 0.5, 0.10, 0.09315557510374568622946),
    (1, 0.5, 0.25, 0.1399996774524826308661),
    (3, 1.0, 0.50, 0.5),
    (3, 1.0, 1.00, 0.6366197723675813430755),
]

FROZEN_KAPPA_STAR = [
    (1, 0.5, 0.1399996774524826308661),
    (2, 1.0, 0.2284732905222318126875),
    (3, 1.0, 0.6366197723675813430755),
]

FROZEN_RIESZ = [
    (1, 0.5, 0.3989422804014326779399),
    (2, 1.0, 0.1591549430918953357689),
    (3, 1.0, 0.05066059182116888572194),
]

# closed form 2^{alpha-1} Gamma(alpha/2) Gamma(d/2) / Gamma((d-alpha)/2)
FROZEN_KPRIME0 = [
    (1, 0.5, 1.253314137315500251208),
    (2, 1.0, 1.0),
    (3, 1.0, 1.570796326794896619231),
]

# first/second derivative at interior points, mpmath mp.diff
FROZEN_KDERIV = [
    (1, 0.5, 0.10, 1, 0.6492859519890054037255),
    (1, 0.5, 0.10, 2, -5.014551832305523288714),
    (1, 0.5, 0.25, 2, -4.0058356777463592051),
]


@pytest.mark.parametrize("d,alpha,delta,want", FROZEN_KAPPA)
def test_kappa_frozen(d, alpha, delta, want):
    assert kappa_of_delta(delta, d, alpha) == pytest.approx(want, rel=1e-13)


@pytest.mark.parametrize("d,alpha,want", FROZEN_KAPPA_STAR)
def test_kappa_star_frozen(d, alpha, want):
    assert kappa_star(d, alpha) == pytest.approx(want, rel=1e-13)
    # the two formulas must agree at the critical exponent
    crit = (d - alpha) / 2.0
    assert kappa_of_delta(crit, d, alpha) == pytest.approx(want, rel=1e-12)


@pytest.mark.parametrize("d,alpha,want", FROZEN_RIESZ)
def test_riesz_frozen(d, alpha, want):
    assert riesz_constant(d, alpha) == pytest.approx(want, rel=1e-13)


@pytest.mark.parametrize("d,alpha,want", FROZEN_KPRIME0)
def test_derivative_at_zero_closed_form(d, alpha, want):
    assert kappa_derivative(0.0, d, alpha, order=1) == pytest.approx(want, rel=1e-13)


@pytest.mark.parametrize("d,alpha,delta,order,want", FROZEN_KDERIV)
def test_derivative_frozen(d, alpha, delta, order, want):
    assert kappa_derivative(delta, d, alpha, order=order) == pytest.approx(
        want, rel=1e-12
    )


def test_derivative_vanishes_at_critical():
    # critical exponent is the maximum of kappa(.)
    for d, alpha in [(1, 0.5), (2, 1.0), (3, 1.0), (3, 1.5)]:
        crit = (d - alpha) / 2.0
        assert abs(kappa_derivative(crit, d, alpha)) < 1e-12
        assert kappa_derivative(crit, d, alpha, order=2) < 0.0


@pytest.mark.parametrize("d,alpha", [(1, 0.5), (2, 1.0), (3, 1.0), (3, 1.9)])
def test_derivative_matches_finite_differences(d, alpha):
    crit = (d - alpha) / 2.0
    for frac in (0.15, 0.4, 0.7, 0.9):
        delta = frac * crit
        step = 1e-5 * crit
        fd1 = (
            kappa_of_delta(delta + step, d, alpha)
            - kappa_of_delta(delta - step, d, alpha)
        ) / (2.0 * step)
        fd2 = (
            kappa_of_delta(delta + step, d, alpha)
            - 2.0 * kappa_of_delta(delta, d, alpha)
            + kappa_of_delta(delta - step, d, alpha)
        ) / step**2
        assert kappa_derivative(delta, d, alpha, 1) == pytest.approx(fd1, rel=1e-6)
        assert kappa_derivative(delta, d, alpha, 2) == pytest.approx(fd2, rel=1e-4)


@given(
    frac=st.floats(1e-3, 1.0 - 1e-3),
    da=st.sampled_from([(1, 0.5), (1, 0.8), (2, 1.0), (3, 1.0), (3, 1.7)]),
)
@settings(max_examples=80, deadline=None)
def test_kappa_symmetry(frac, da):
    # kappa(delta) == kappa(d - alpha - delta) across the whole interval
    d, alpha = da
    delta = frac * (d - alpha)
    left = kappa_of_delta(delta, d, alpha)
    right = kappa_of_delta(d - alpha - delta, d, alpha)
    assert left == pytest.approx(right, rel=1e-12, abs=1e-300)


def test_kappa_symmetry_near_endpoints():
    # close to the interval ends the mirrored argument d-alpha-delta itself
    # loses relative precision (cancellation in the argument), so the
    # comparison there is absolute, at the scale of that rounding
    for d, alpha in [(1, 0.5), (3, 1.7)]:
        for delta in (1e-9, 1e-6, 1e-4):
            left = kappa_of_delta(delta, d, alpha)
            right = kappa_of_delta(d - alpha - delta, d, alpha)
            assert left == pytest.approx(right, rel=1e-9, abs=1e-14)


@pytest.mark.parametrize("d,alpha", [(1, 0.5), (2, 1.0), (3, 1.0)])
def test_kappa_monotone_on_branch(d, alpha):
    crit = (d - alpha) / 2.0
    vals = [kappa_of_delta(crit * k / 200.0, d, alpha) for k in range(201)]
    for a, b in zip(vals, vals[1:]):
        assert b - a > -1e-12
    assert vals[0] == 0.0
    assert vals[-1] == pytest.approx(kappa_star(d, alpha), rel=1e-12)


@given(
    frac=st.floats(0.0, 1.0),
    da=st.sampled_from([(1, 0.5), (2, 1.0), (3, 1.0), (3, 0.3)]),
)
@settings(max_examples=60, deadline=None)
def test_round_trip(frac, da):
    d, alpha = da
    delta = frac * (d - alpha) / 2.0
    kappa = kappa_of_delta(delta, d, alpha)
    back = delta_of_kappa(kappa, d, alpha)
    if delta < 0.95 * (d - alpha) / 2.0:
        # the contract: delta itself comes back to 1e-10 absolute
        assert back == pytest.approx(delta, abs=1e-10)
    else:
        # near the critical point kappa is quadratically flat, so delta is
        # only recoverable to sqrt(tol); measure the error through kappa,
        # absolute at the scale of the maximum
        ks = kappa_star(d, alpha)
        assert kappa_of_delta(back, d, alpha) == pytest.approx(
            kappa, abs=1e-10 * ks
        )


def test_delta_of_kappa_rejects_supercritical():
    with pytest.raises(ValueError):
        delta_of_kappa(kappa_star(1, 0.5) * 1.01, 1, 0.5)
    with pytest.raises(ValueError):
        delta_of_kappa(-0.1, 1, 0.5)


@pytest.mark.parametrize("d,alpha", [(1, 0.5), (2, 1.0), (3, 1.0), (3, 1.5)])
def test_riesz_consistency_with_c_beta(d, alpha):
    # c_{d-alpha} must equal 1/A to 1e-10 (identity between the two families)
    assert c_beta(d - alpha, d, alpha) * riesz_constant(d, alpha) == pytest.approx(
        1.0, rel=1e-10
    )


def test_levy_prefactor_frozen():
    assert levy_prefactor(1, 0.5) == pytest.approx(0.19947114020071633897, rel=1e-13)
    assert levy_prefactor(3, 1.0) == pytest.approx(0.1013211836423377714439, rel=1e-13)


def test_sphere_area_values():
    assert sphere_area(1) == pytest.approx(2.0, rel=1e-15)
    assert sphere_area(2) == pytest.approx(2.0 * math.pi, rel=1e-15)
    assert sphere_area(3) == pytest.approx(4.0 * math.pi, rel=1e-15)


class TestModelParams:
    def test_from_delta_round_trip(self):
        p = ModelParams.from_delta(1, 0.5, 0.1)
        assert p.kappa == pytest.approx(0.09315557510374568622946, rel=1e-13)
        q = ModelParams.from_kappa(1, 0.5, p.kappa)
        assert q.delta == pytest.approx(0.1, abs=1e-10)

    def test_inconsistent_pair_rejected(self):
        with pytest.raises(ValueError, match="inconsistent coupling"):
            ModelParams(1, 0.5, 0.1, 0.09)

    def test_validation(self):
        with pytest.raises(ValueError):
            ModelParams.from_delta(1, 2.0, 0.0)  # alpha out of range
        with pytest.raises(ValueError):
            ModelParams.from_delta(1, 1.5, 0.0)  # alpha >= d
        with pytest.raises(ValueError):
            ModelParams.from_delta(1, 0.5, 0.3)  # supercritical exponent

    def test_critical_flag(self):
        assert ModelParams.from_delta(1, 0.5, 0.25).is_critical
        assert not ModelParams.from_delta(1, 0.5, 0.1).is_critical

    def test_weight(self):
        p = ModelParams.from_delta(1, 0.5, 0.25)
        assert p.weight(4.0) == pytest.approx(4.0**-0.25, rel=1e-15)
        assert ModelParams.from_delta(1, 0.5, 0.0).weight(5.0) == 1.0
