"""Couplings and constants of the fractional Schrödinger operator
Δ^{α/2} + κ |x|^{-α}.

The admissible couplings κ are parametrized by the decay exponent δ of the
invariant weight h(x) = |x|^{-δ}: for each δ in [0, (d-α)/2] the coupling

    κ(δ) = 2^α Γ((δ+α)/2) Γ((d-δ)/2) / ( Γ(δ/2) Γ((d-δ-α)/2) )

makes h invariant for the perturbed semigroup.  κ(·) increases from 0 at
δ = 0 to its maximum κ* at the critical exponent δ = (d-α)/2 and is
symmetric about it (κ(δ) = κ(d-α-δ)).  Everything in this module is a
smooth function of (d, α, δ) built from Gamma, digamma and trigamma.

Numerical notes
---------------
Γ(δ/2) in the denominator blows up as δ -> 0, so κ(δ) is evaluated in the
factored form κ(δ) = δ f(δ) with

    f(δ) = 2^{α-1} Γ((δ+α)/2) Γ((d-δ)/2) / ( Γ((d-δ-α)/2) Γ(1+δ/2) ),

which is smooth and positive on the whole closed interval.  Derivatives are
taken through log f (digamma / trigamma combinations), never through the
singular factor.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from scipy.special import gammaln, polygamma, psi

__all__ = [
    "ModelParams",
    "c_beta",
    "delta_of_kappa",
    "kappa_derivative",
    "kappa_of_delta",
    "kappa_star",
    "levy_prefactor",
    "riesz_constant",
    "sphere_area",
]

#: absolute tolerance used when inverting kappa(delta) by bisection
_BISECT_TOL = 1e-12
_BISECT_MAXIT = 200


def _validate_da(d: int, alpha: float) -> None:
    if not isinstance(d, int) or d < 1:
        raise ValueError(f"dimension must be a positive integer, got {d!r}")
    if not 0.0 < alpha < 2.0:
        raise ValueError(f"stability index must lie in (0, 2), got {alpha}")
    if alpha >= d:
        raise ValueError(
            f"need alpha < d for the inverse-power potential (got alpha={alpha}, d={d})"
        )


def sphere_area(d: int) -> float:
    """Surface area of the unit sphere in R^d: 2 pi^{d/2} / Gamma(d/2)."""
    return 2.0 * math.pi ** (d / 2.0) / math.gamma(d / 2.0)


def _f_smooth(d: int, alpha: float, delta: float) -> float:
    """The smooth factor f with kappa(delta) = delta * f(delta)."""
    lg = (
        (alpha - 1.0) * math.log(2.0)
        + gammaln((delta + alpha) / 2.0)
        + gammaln((d - delta) / 2.0)
        - gammaln((d - delta - alpha) / 2.0)
        - gammaln(1.0 + delta / 2.0)
    )
    return float(math.exp(lg))


def _dlogf(d: int, alpha: float, delta: float) -> float:
    """d/d(delta) of log f (a digamma combination)."""
    return 0.5 * float(
        psi((delta + alpha) / 2.0)
        - psi((d - delta) / 2.0)
        + psi((d - delta - alpha) / 2.0)
        - psi(1.0 + delta / 2.0)
    )


def _d2logf(d: int, alpha: float, delta: float) -> float:
    """Second delta-derivative of log f (a trigamma combination)."""
    return 0.25 * float(
        polygamma(1, (delta + alpha) / 2.0)
        + polygamma(1, (d - delta) / 2.0)
        - polygamma(1, (d - delta - alpha) / 2.0)
        - polygamma(1, 1.0 + delta / 2.0)
    )


def kappa_of_delta(delta: float, d: int, alpha: float) -> float:
    """Coupling strength of the inverse-power potential that makes
    |x|^{-delta} invariant.

    Valid for delta in [0, d-alpha]; increasing on [0, (d-alpha)/2],
    symmetric about the critical exponent.  The endpoint values are exact
    limits: kappa(0) = kappa(d-alpha) = 0.
    """
    _validate_da(d, alpha)
    if not 0.0 <= delta <= d - alpha:
        raise ValueError(
            f"decay exponent must lie in [0, {d - alpha}], got {delta}"
        )
    if delta == 0.0 or delta == d - alpha:
        return 0.0
    # evaluate on the half-interval where the factored form is smooth,
    # using the symmetry kappa(delta) = kappa(d - alpha - delta)
    dl = min(delta, d - alpha - delta)
    return dl * _f_smooth(d, alpha, dl)


def kappa_star(d: int, alpha: float) -> float:
    """Largest admissible coupling: value of kappa at the critical exponent,

    kappa* = 2^alpha ( Gamma((d+alpha)/4) / Gamma((d-alpha)/4) )^2.
    """
    _validate_da(d, alpha)
    lg = alpha * math.log(2.0) + 2.0 * (
        gammaln((d + alpha) / 4.0) - gammaln((d - alpha) / 4.0)
    )
    return float(math.exp(lg))


def delta_of_kappa(kappa: float, d: int, alpha: float) -> float:
    """Inverse of kappa_of_delta on the branch [0, (d-alpha)/2].

    Bisection to absolute tolerance 1e-12 in delta.  Raises for kappa
    outside [0, kappa*].
    """
    _validate_da(d, alpha)
    ks = kappa_star(d, alpha)
    if kappa < 0.0:
        raise ValueError(f"coupling must be nonnegative, got {kappa}")
    if kappa > ks * (1.0 + 1e-14):
        raise ValueError(
            f"coupling {kappa} exceeds the admissible maximum {ks} "
            f"(d={d}, alpha={alpha})"
        )
    if kappa == 0.0:
        return 0.0
    kappa = min(kappa, ks)
    lo, hi = 0.0, (d - alpha) / 2.0
    for _ in range(_BISECT_MAXIT):
        mid = 0.5 * (lo + hi)
        if kappa_of_delta(mid, d, alpha) < kappa:
            lo = mid
        else:
            hi = mid
        if hi - lo <= _BISECT_TOL:
            return 0.5 * (lo + hi)
    raise RuntimeError(
        "bisection for delta_of_kappa failed to converge in "
        f"{_BISECT_MAXIT} iterations; this is a bug"
    )


def kappa_derivative(delta: float, d: int, alpha: float, order: int = 1) -> float:
    """delta-derivative of kappa_of_delta of order 1 or 2.

    Uses kappa = delta f(delta):  kappa'  = f (1 + delta u),
    kappa'' = f (2u + delta (u^2 + u')) with u = (log f)'.  Smooth on the
    whole interval, in particular

        kappa'(0) = f(0) = 2^{alpha-1} Gamma(alpha/2) Gamma(d/2)
                            / Gamma((d-alpha)/2),

    and kappa'((d-alpha)/2) = 0 (critical point).
    """
    _validate_da(d, alpha)
    if not 0.0 <= delta <= (d - alpha) / 2.0 + 1e-15:
        raise ValueError(
            f"decay exponent must lie in [0, {(d - alpha) / 2}], got {delta}"
        )
    if order not in (1, 2):
        raise ValueError(f"order must be 1 or 2, got {order}")
    f = _f_smooth(d, alpha, delta)
    u = _dlogf(d, alpha, delta)
    if order == 1:
        return f * (1.0 + delta * u)
    up = _d2logf(d, alpha, delta)
    return f * (2.0 * u + delta * (u * u + up))


def riesz_constant(d: int, alpha: float) -> float:
    """Constant A with  integral_0^inf p_t(x) dt = A |x|^{alpha-d}:

    A = Gamma((d-alpha)/2) / ( Gamma(alpha/2) 2^alpha pi^{d/2} ).
    """
    _validate_da(d, alpha)
    lg = (
        gammaln((d - alpha) / 2.0)
        - gammaln(alpha / 2.0)
        - alpha * math.log(2.0)
        - (d / 2.0) * math.log(math.pi)
    )
    return float(math.exp(lg))


def c_beta(beta: float, d: int, alpha: float) -> float:
    """Normalizing constant of the power-weight time integral,

        c_beta * integral_0^inf t^{(d-alpha-beta)/alpha} p_t(x) dt
            = |x|^{-beta},

    valid for 0 < beta < d:

        c_beta = 2^{d-beta} pi^{d/2} Gamma((d-beta)/2)
                 / ( Gamma((d-beta)/alpha) Gamma(beta/2) ).

    At beta = d - alpha this reduces to 1/riesz_constant.
    """
    _validate_da(d, alpha)
    if not 0.0 < beta < d:
        raise ValueError(f"beta must lie in (0, {d}), got {beta}")
    lg = (
        (d - beta) * math.log(2.0)
        + (d / 2.0) * math.log(math.pi)
        + gammaln((d - beta) / 2.0)
        - gammaln((d - beta) / alpha)
        - gammaln(beta / 2.0)
    )
    return float(math.exp(lg))


def levy_prefactor(d: int, alpha: float) -> float:
    """Constant in the jump intensity nu(y) = levy_prefactor * |y|^{-d-alpha}:

    alpha 2^{alpha-1} Gamma((d+alpha)/2) / ( pi^{d/2} Gamma(1-alpha/2) ).

    Unlike the inverse-power-potential constants, this exists for every
    alpha in (0, 2) regardless of d, so only those bounds are enforced.
    """
    if not isinstance(d, int) or d < 1:
        raise ValueError(f"dimension must be a positive integer, got {d!r}")
    if not 0.0 < alpha < 2.0:
        raise ValueError(f"stability index must lie in (0, 2), got {alpha}")
    lg = (
        (alpha - 1.0) * math.log(2.0)
        + gammaln((d + alpha) / 2.0)
        - (d / 2.0) * math.log(math.pi)
        - gammaln(1.0 - alpha / 2.0)
    )
    return alpha * float(math.exp(lg))


@dataclass(frozen=True)
class ModelParams:
    """Admissible parameter set (d, alpha, delta, kappa).

    delta and kappa are stored redundantly; construction enforces
    kappa = kappa_of_delta(delta) to 1e-12 relative.  Use the classmethods
    to build from one of the two.
    """

    d: int
    alpha: float
    delta: float
    kappa: float

    def __post_init__(self) -> None:
        _validate_da(self.d, self.alpha)
        crit = (self.d - self.alpha) / 2.0
        if not 0.0 <= self.delta <= crit + 1e-15:
            raise ValueError(
                f"decay exponent must lie in [0, {crit}], got {self.delta}"
            )
        want = kappa_of_delta(self.delta, self.d, self.alpha)
        scale = max(abs(want), 1.0)
        if abs(self.kappa - want) > 1e-12 * scale:
            raise ValueError(
                f"inconsistent coupling: kappa={self.kappa} but "
                f"kappa(delta={self.delta}) = {want}"
            )

    @classmethod
    def from_delta(cls, d: int, alpha: float, delta: float) -> "ModelParams":
        return cls(d, alpha, delta, kappa_of_delta(delta, d, alpha))

    @classmethod
    def from_kappa(cls, d: int, alpha: float, kappa: float) -> "ModelParams":
        return cls(d, alpha, delta_of_kappa(kappa, d, alpha), kappa)

    @property
    def critical_delta(self) -> float:
        return (self.d - self.alpha) / 2.0

    @property
    def is_critical(self) -> bool:
        return abs(self.delta - self.critical_delta) <= 1e-12

    def weight(self, r):
        """Invariant weight h(|x|) = |x|^{-delta} on radii r."""
        import numpy as np

        r = np.asarray(r, dtype=float)
        if self.delta == 0.0:
            return np.ones_like(r)
        return r ** (-self.delta)
