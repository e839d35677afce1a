"""Averaged deviations of primes in progressions over the modulus pair (q, r).

The inner quantity for a given r is the q-sum of

    psi(x; qr, a) - Lambda(a) - x/phi(qr),   q <= Q_r, (q, a) = 1,

computed by :func:`bfilab.progressions.delta_sum`. Dyadic mode takes
R/2 < r <= R with Q_r = x/(rM); full mode takes r <= R with a common
Q = x/(RM).
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from typing import Callable

from .arith import factorize
from .constants import DEFAULT_CUTOFF, c6, constant_family
from .errors import DomainError
from .progressions import delta_sum
from .totient_sums import REFERENCE_DECAY, weighted_lhs

MODES = ("dyadic", "full")
DEFAULT_LAMBDA_GUARD = 0.1


@dataclass(frozen=True)
class ExperimentConfig:
    x: int
    R: float
    M: float
    a: int
    mode: str = "dyadic"
    lambda_guard: float = DEFAULT_LAMBDA_GUARD
    override_lambda_guard: bool = False

    def __post_init__(self):
        if self.x < 2:
            raise DomainError(f"x must be >= 2, got {self.x}")
        if self.a == 0:
            raise DomainError("a must be nonzero")
        if not self.R > 0:
            raise DomainError(f"R must be positive, got {self.R}")
        if not self.M >= 1:
            raise DomainError(f"M must be >= 1, got {self.M}")
        if self.mode not in MODES:
            raise DomainError(f"mode must be one of {MODES}, got {self.mode!r}")
        limit = self.x**self.lambda_guard
        if self.R > limit:
            msg = f"R = {self.R} exceeds x^{self.lambda_guard} = {limit:.4g}"
            if not self.override_lambda_guard:
                raise DomainError(msg)
            warnings.warn(msg + "; guard overridden", stacklevel=3)

    def moduli(self) -> list[int]:
        """Admissible r in increasing order."""
        lo = math.floor(self.R / 2) + 1 if self.mode == "dyadic" else 1
        hi = math.floor(self.R)
        return [r for r in range(lo, hi + 1) if math.gcd(r, abs(self.a)) == 1]

    def budget(self, r: int) -> int:
        """Largest q for modulus r."""
        scale = r if self.mode == "dyadic" else self.R
        return math.floor(self.x / (scale * self.M))

    def as_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class DeviationRow:
    r: int
    inner: float
    prediction: float
    abs_dev: float

    def as_dict(self) -> dict:
        return {"r": self.r, "inner": self.inner, "prediction": self.prediction, "abs_dev": self.abs_dev}


@dataclass(frozen=True)
class DeviationTable:
    config: ExperimentConfig
    rows: list[DeviationRow]
    aggregate: float

    def summary(self) -> dict:
        x, M = self.config.x, self.config.M
        return {
            "aggregate": self.aggregate,
            "reference_x_over_M_decay": x / M**REFERENCE_DECAY,
            "x_over_logA": {str(A): x / math.log(x) ** A for A in (1, 2, 3)},
            "rows": len(self.rows),
        }


@dataclass(frozen=True)
class NuPrediction:
    leading: float
    multiplier: float
    value: float  # leading * multiplier
    bracket: float  # width of the unquantified O-term: log(RM)/R or 1/R


def _phi_over(a: int) -> float:
    f = factorize(abs(a))
    return f.phi / f.n


def mu_average(a: int, r: int, M: float, cutoff: int = DEFAULT_CUTOFF) -> float:
    """-1/2 log M - C5(r) for a = +-1, -1/2 log p for a = +-p^e, else 0."""
    if a == 0:
        raise DomainError("a must be nonzero")
    if math.gcd(r, abs(a)) != 1:
        raise DomainError(f"gcd(r, |a|) != 1 for r={r}, a={a}")
    if not M >= 1:
        raise DomainError(f"M must be >= 1, got {M}")
    f = factorize(abs(a))
    if f.omega == 0:
        return -0.5 * math.log(M) - constant_family(1, r, cutoff).C5.value
    if f.omega == 1:
        return -0.5 * math.log(f.factors[0][0])
    return 0.0


def nu_average(a: int, M: float, R: float, cutoff: int = DEFAULT_CUTOFF) -> NuPrediction:
    """Leading value of nu(a, M) with the bounded-R multiplier applied."""
    if a == 0:
        raise DomainError("a must be nonzero")
    if not (M >= 1 and R >= 1):
        raise DomainError("M and R must be >= 1")
    f = factorize(abs(a))
    if f.omega == 0:
        lead = 0.5 * math.log(M) + c6(cutoff).value
        mult = math.floor(R) / R
        bracket = math.log(R * M) / R
    elif f.omega == 1:
        lead = 0.5 * math.log(f.factors[0][0])
        count = sum(1 for r in range(1, math.floor(R) + 1) if math.gcd(r, f.n) == 1)
        mult = count / (_phi_over(a) * R)
        bracket = 1 / R
    else:
        return NuPrediction(0.0, 1.0, 0.0, 0.0)
    return NuPrediction(lead, mult, lead * mult, bracket)


def _map_rows(fn: Callable[[int], DeviationRow], rs: list[int], threads: int) -> list[DeviationRow]:
    # rows are independent; collected in increasing r whatever the worker count
    if threads > 1 and len(rs) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(fn, rs))
    return [fn(r) for r in rs]


def deviation_table(cfg: ExperimentConfig, threads: int = 1, cutoff: int = DEFAULT_CUTOFF) -> DeviationTable:
    """Per-r inner sums against (phi(a)/a) * budget * mu, and the sum of |difference|."""
    share = _phi_over(cfg.a)

    def row(r: int) -> DeviationRow:
        Q = cfg.budget(r)
        inner = delta_sum(cfg.x, r, Q, cfg.a)
        if cfg.mode == "dyadic":
            pred = share * cfg.x / (r * cfg.M) * mu_average(cfg.a, r, cfg.M, cutoff)
        else:
            RM = cfg.R * cfg.M
            pred = share * cfg.x / RM * mu_average(cfg.a, r, RM / r, cutoff)
        return DeviationRow(r, inner, pred, abs(inner - pred))

    rows = _map_rows(row, cfg.moduli(), threads)
    return DeviationTable(cfg, rows, math.fsum(row.abs_dev for row in rows))


def raw_aggregate(cfg: ExperimentConfig, threads: int = 1) -> tuple[list[DeviationRow], float]:
    """Rows with zero prediction (plain |inner|) and their sum."""

    def row(r: int) -> DeviationRow:
        inner = delta_sum(cfg.x, r, cfg.budget(r), cfg.a)
        return DeviationRow(r, inner, 0.0, abs(inner))

    rows = _map_rows(row, cfg.moduli(), threads)
    return rows, math.fsum(row.abs_dev for row in rows)


def nu_measurement(cfg: ExperimentConfig, threads: int = 1, cutoff: int = DEFAULT_CUTOFF) -> dict:
    """Measured nu from the raw full-mode aggregate, next to the predicted value."""
    if cfg.mode != "full":
        raise DomainError("nu_measurement requires mode 'full'")
    _, agg = raw_aggregate(cfg, threads)
    measured = agg / _phi_over(cfg.a) ** 2 * cfg.M / cfg.x
    pred = nu_average(cfg.a, cfg.M, max(cfg.R, 1), cutoff)
    return {
        "measured_nu": measured,
        "predicted_nu": pred.value,
        "leading": pred.leading,
        "multiplier": pred.multiplier,
        "bracket": pred.bracket,
        "aggregate": agg,
    }


def prop61_bracket(x: int, r: int, M: float, a: int, cutoff: int = DEFAULT_CUTOFF) -> float:
    """x (C1(a,r)/r log(r'M) + C3(a,r)/r - sum_{s<=M,(s,a)=1} (1 - s/M)/phi(rs))."""
    fam = constant_family(a, r, cutoff)
    rad = factorize(r).radical
    main = fam.C1.value / r * math.log(rad * M) + fam.C3.value / r
    return x * math.fsum([main, -weighted_lhs(a, r, M)])


def prop61_check(
    x: int,
    R: float,
    M: float,
    a: int,
    lambda_guard: float = DEFAULT_LAMBDA_GUARD,
    override_lambda_guard: bool = False,
    threads: int = 1,
    cutoff: int = DEFAULT_CUTOFF,
) -> dict:
    """Dyadic r-sum of |inner - bracket| with its x/(log x)^A reference scales."""
    cfg = ExperimentConfig(x, R, M, a, "dyadic", lambda_guard, override_lambda_guard)

    def row(r: int) -> DeviationRow:
        inner = delta_sum(x, r, cfg.budget(r), a)
        pred = prop61_bracket(x, r, M, a, cutoff)
        return DeviationRow(r, inner, pred, abs(inner - pred))

    rows = _map_rows(row, cfg.moduli(), threads)
    return {
        "rows": rows,
        "aggregate": math.fsum(row.abs_dev for row in rows),
        "x_over_logA": {str(A): x / math.log(x) ** A for A in (1, 2, 3)},
    }
