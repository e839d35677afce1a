"""Partial sums of n/phi(n), 1/phi(n) and their twisted, weighted variants,
with residuals against the asymptotic main terms.

Sums run over integers n <= M coprime to a; M may be any real >= 1. Terms
are accumulated with ``math.fsum`` so the float sum is correctly rounded
and independent of evaluation order.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .arith import cached_phi_table, coprime_mask, factorize
from .constants import DEFAULT_CUTOFF, constant_family
from .errors import DomainError

# a = +-1 weighted-sum main terms. "statement" and "proof" are the two printed
# forms; "derived" redoes the Mobius reduction of the r = 1 expansion by hand.
VARIANTS = ("statement", "proof", "derived")
# Chosen by the variant pre-run (see tests/test_totient_sums.py::test_variant_selection).
DEFAULT_VARIANT = "derived"

HUXLEY_EXPONENT = 205 / 538
REFERENCE_DECAY = 1 + HUXLEY_EXPONENT  # 743/538


@dataclass(frozen=True)
class ResidualRow:
    M: float
    lhs: float
    main_term: float
    residual: float
    variant: str | None = None
    alternatives: dict[str, float] = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {"M": self.M, "lhs": self.lhs, "main_term": self.main_term, "residual": self.residual}


@dataclass(frozen=True)
class ExponentFit:
    slope: float
    intercept: float
    rsq: float
    points: int


def _validate(a: int, r: int, M: float) -> int:
    if a == 0:
        raise DomainError("a must be nonzero")
    if r < 1:
        raise DomainError(f"r must be positive, got {r}")
    if math.gcd(abs(a), r) != 1:
        raise DomainError(f"gcd(|a|, r) != 1 for a={a}, r={r}")
    if not M >= 1:
        raise DomainError(f"M must be >= 1, got {M}")
    return math.floor(M)


def _coprime_range(N: int, a: int) -> np.ndarray:
    n = np.arange(1, N + 1, dtype=np.int64)
    return n[coprime_mask(n, a)]


def _fsum(arr: np.ndarray) -> float:
    return math.fsum(arr.tolist())


def partial_sum(kind: int, a: int, r: int, M: float, cutoff: int = DEFAULT_CUTOFF) -> ResidualRow:
    """One of the four elementary estimates, summed over n <= M, (n, a) = 1.

    kind 1: n/phi(n)      ~ C1(a) M
    kind 2: 1/phi(n)      ~ C1(a) log M + C2(a)
    kind 3: rn/phi(rn)    ~ C1(a,r) M
    kind 4: 1/phi(rn)     ~ (C1(a,r)/r) log(r'M) + C2(a,r)/r
    """
    if kind not in (1, 2, 3, 4):
        raise DomainError(f"kind must be 1..4, got {kind}")
    N = _validate(a, r, M)
    rr = 1 if kind in (1, 2) else r
    n = _coprime_range(N, a)
    phi = cached_phi_table(rr * N)[rr * n].astype(np.float64)
    if kind in (1, 3):
        lhs = _fsum((rr * n).astype(np.float64) / phi)
    else:
        lhs = _fsum(1.0 / phi)
    fam = constant_family(a, rr, cutoff)
    c1, c2 = fam.C1.value, fam.C2.value
    if kind in (1, 3):
        main = c1 * M
    else:
        main = c1 / rr * math.log(factorize(rr).radical * M) + c2 / rr
    return ResidualRow(float(M), lhs, main, lhs - main)


def weighted_lhs(a: int, r: int, M: float) -> float:
    """sum_{n <= M, (n,a)=1} (1 - n/M) / phi(nr)."""
    N = _validate(a, r, M)
    n = _coprime_range(N, a)
    phi = cached_phi_table(r * N)[r * n].astype(np.float64)
    return _fsum((M - n.astype(np.float64)) / (M * phi))


def weighted_main_terms(a: int, r: int, M: float, cutoff: int = DEFAULT_CUTOFF) -> dict[str, float]:
    """Main term(s) of the weighted sum keyed by variant name.

    For |a| > 1 there is a single form, keyed ``"main"``. For a = +-1 all of
    :data:`VARIANTS` are returned.
    """
    fam = constant_family(a, r, cutoff)
    c1, c2, c3 = fam.C1.value, fam.C2.value, fam.C3.value
    rad = factorize(r).radical
    log_rm = math.log(rad * M)
    lead = c1 / r * log_rm
    fa = factorize(abs(a))
    if fa.omega >= 1:
        extra = 0.0
        if fa.omega == 1:
            extra = (fa.phi / fa.n) * fa.von_mangoldt / (2 * r * M)
        return {"main": lead + c3 / r + extra}
    c5_1 = constant_family(1, 1, cutoff).C5.value
    c5_r = fam.C5.value
    rM = r * M
    return {
        "statement": lead + c3 / r + log_rm / (2 * rM) + c5_1 / rM,
        "proof": lead + c2 / r + math.log(M) / (2 * rM) + c5_r / rM,
        "derived": lead + c3 / r + math.log(M) / (2 * rM) + c5_r / rM,
    }


def weighted_sum(
    a: int, r: int, M: float, variant: str | None = None, cutoff: int = DEFAULT_CUTOFF
) -> ResidualRow:
    """Weighted sum against its main term; residual is the error E(a, r, M).

    ``variant`` selects the a = +-1 main-term form (default
    :data:`DEFAULT_VARIANT`); residuals of every form are kept in
    ``alternatives``.
    """
    lhs = weighted_lhs(a, r, M)
    mains = weighted_main_terms(a, r, M, cutoff)
    if "main" in mains:
        return ResidualRow(float(M), lhs, mains["main"], lhs - mains["main"])
    variant = variant or DEFAULT_VARIANT
    if variant not in VARIANTS:
        raise DomainError(f"unknown variant {variant!r}")
    alts = {k: lhs - v for k, v in mains.items()}
    return ResidualRow(float(M), lhs, mains[variant], alts[variant], variant, alts)


def compare_variants(r: int, Ms: Sequence[float], a: int = 1) -> dict[str, dict]:
    """Residual series of every a = +-1 variant and their fitted decay.

    Returns ``{variant: {"residuals": [...], "fit": ExponentFit | None}}``
    plus the key ``"winner"``: the variant with the smallest residual at the
    largest M (ties broken by the fitted exponent, then in favour of
    :data:`DEFAULT_VARIANT`, which coincides with ``statement`` at r = 1).
    """
    if abs(a) != 1:
        raise DomainError("variants only exist for a = +-1")
    rows = [weighted_sum(a, r, M) for M in Ms]
    out: dict[str, dict] = {}
    for v in VARIANTS:
        res = [row.alternatives[v] for row in rows]
        vrows = [ResidualRow(row.M, row.lhs, row.lhs - e, e) for row, e in zip(rows, res)]
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                fit = fit_error_exponent(vrows)
        except DomainError:
            fit = None
        out[v] = {"residuals": res, "fit": fit}
    out["winner"] = min(
        VARIANTS,
        key=lambda v: (
            abs(out[v]["residuals"][-1]),
            -(out[v]["fit"].slope if out[v]["fit"] else 0.0),
            v != DEFAULT_VARIANT,
        ),
    )
    return out


def fit_error_exponent(rows: Sequence[ResidualRow]) -> ExponentFit:
    """Least-squares slope of log|residual| against log M, negated.

    A residual decaying like M^-k yields ``slope`` k.
    """
    usable = []
    for row in rows:
        if row.residual == 0 or not math.isfinite(row.residual):
            warnings.warn(f"dropping row with residual {row.residual} at M={row.M}", stacklevel=2)
            continue
        usable.append(row)
    if len(usable) < 3:
        raise DomainError(f"need at least 3 rows with nonzero residual, got {len(usable)}")
    x = np.log([row.M for row in usable])
    y = np.log([abs(row.residual) for row in usable])
    if x.max() - x.min() < 2 * math.log(10) * (1 - 1e-12):
        raise DomainError("M values must span at least two decades")
    A = np.vstack([x, np.ones_like(x)]).T
    (slope, intercept), *_ = np.linalg.lstsq(A, y, rcond=None)
    pred = slope * x + intercept
    ss_res = float(np.sum((y - pred) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    rsq = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return ExponentFit(-float(slope), float(intercept), min(max(rsq, 0.0), 1.0), len(usable))
