"""Numerics for the heat kernel of the fractional Laplacian with an
inverse-power (Hardy-type) potential, its self-similar solution, and
large-time asymptotics in weighted norms."""

from hardyheat.constants import (
    ModelParams,
    c_beta,
    delta_of_kappa,
    kappa_derivative,
    kappa_of_delta,
    kappa_star,
    riesz_constant,
)

__version__ = "0.1.0"

__all__ = [
    "ModelParams",
    "c_beta",
    "delta_of_kappa",
    "kappa_derivative",
    "kappa_of_delta",
    "kappa_star",
    "riesz_constant",
    "__version__",
]
