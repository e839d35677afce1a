"""Computational toolkit for primes in arithmetic progressions averaged over
moduli, their secondary terms, and the Titchmarsh divisor problem in
progressions."""

__version__ = "0.1.0"

from .arith import Factorization, factorize
from .bfi_experiments import (
    DeviationRow,
    ExperimentConfig,
    deviation_table,
    mu_average,
    nu_average,
    nu_measurement,
    prop61_check,
)
from .constants import (
    ConstantValue,
    c6,
    constant,
    constant_family,
    mobius_convolution_check,
    mult_additive_identity_check,
)
from .errors import BfiLabError, DomainError, InvariantError, ResourceError
from .progressions import delta_sum, divisor_switch_check, psi
from .sieve import SieveSegment, sieve_segment
from .titchmarsh import (
    TitchmarshRow,
    bv_titchmarsh_table,
    titchmarsh_main_term,
    titchmarsh_sum,
)
from .totient_sums import ExponentFit, ResidualRow, fit_error_exponent, partial_sum, weighted_sum

__all__ = [
    "BfiLabError",
    "ConstantValue",
    "DeviationRow",
    "DomainError",
    "ExperimentConfig",
    "ExponentFit",
    "Factorization",
    "InvariantError",
    "ResidualRow",
    "ResourceError",
    "SieveSegment",
    "TitchmarshRow",
    "bv_titchmarsh_table",
    "c6",
    "constant",
    "constant_family",
    "delta_sum",
    "deviation_table",
    "divisor_switch_check",
    "factorize",
    "fit_error_exponent",
    "mobius_convolution_check",
    "mu_average",
    "mult_additive_identity_check",
    "nu_average",
    "nu_measurement",
    "partial_sum",
    "prop61_check",
    "psi",
    "sieve_segment",
    "titchmarsh_main_term",
    "titchmarsh_sum",
    "weighted_sum",
]
