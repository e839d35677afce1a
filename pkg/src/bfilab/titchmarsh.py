"""Titchmarsh divisor sums in arithmetic progressions."""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .arith import coprime_divisor_count, factorize, tau_table
from .constants import DEFAULT_CUTOFF, constant_family
from .errors import DomainError
from .progressions import admissible_moduli, first_in_class, progression_sums
from .sieve import von_mangoldt_array

DEFAULT_LAMBDA_GUARD = 0.1


@dataclass(frozen=True)
class TitchmarshRow:
    x: int
    q: int
    a: int
    sum: float
    main_term: float
    error: float

    @property
    def rel_error(self) -> float:
        return self.error / self.main_term

    def as_dict(self) -> dict:
        return {
            "x": self.x,
            "q": self.q,
            "a": self.a,
            "sum": self.sum,
            "main_term": self.main_term,
            "error": self.error,
            "rel_error": self.rel_error,
        }


@dataclass(frozen=True)
class TitchmarshTable:
    x: int
    Q: int
    a: int
    rows: list[TitchmarshRow]
    total_abs_error: float
    skipped: int

    def x_over_log(self, A: int) -> float:
        return self.x / math.log(self.x) ** A

    def summary(self) -> dict:
        return {
            "x": self.x,
            "Q": self.Q,
            "a": self.a,
            "total_abs_error": self.total_abs_error,
            "skipped": self.skipped,
            "x_over_logA": {str(A): self.x_over_log(A) for A in (1, 2, 3)},
        }


@lru_cache(maxsize=2)
def _tau(n: int) -> np.ndarray:
    t = tau_table(n)
    t.flags.writeable = False
    return t


def _check(q: int, a: int) -> None:
    if a == 0:
        raise DomainError("a must be nonzero")
    if q < 1:
        raise DomainError(f"q must be positive, got {q}")
    if math.gcd(q, abs(a)) != 1:
        raise DomainError(f"gcd(q, |a|) != 1 for q={q}, a={a}")


def _m_range(x: int, q: int, a: int) -> tuple[int, int]:
    return abs(a) // q + 1, x // q


def titchmarsh_sum(x: int, q: int, a: int, tau: np.ndarray | None = None) -> float:
    """sum_{|a|/q < m <= x/q} Lambda(qm + a) tau(m).

    ``tau`` may be a precomputed divisor-count table covering m <= x/q;
    by default a memoized global table up to ``x`` is used.
    """
    x, q, a = int(x), int(q), int(a)
    _check(q, a)
    m0, m1 = _m_range(x, q, a)
    if m1 < m0:
        return 0.0
    lam = von_mangoldt_array(q * m1 + max(a, 0))
    if tau is None:
        tau = _tau(x)
    m = np.arange(m0, m1 + 1, dtype=np.int64)
    vals = lam[q * m + a]
    nz = vals > 0
    return math.fsum((vals[nz] * tau[m[nz]]).tolist())


def titchmarsh_sum_local_tau(x: int, q: int, a: int) -> float:
    """Same sum with a divisor table built only up to x/q."""
    return titchmarsh_sum(x, q, a, tau=tau_table(max(int(x) // int(q), 1)))


def titchmarsh_sum_by_factorization(x: int, q: int, a: int) -> float:
    """Same sum indexed by n = qm + a, with tau((n - a)/q) from factorize."""
    x, q, a = int(x), int(q), int(a)
    _check(q, a)
    m0, m1 = _m_range(x, q, a)
    if m1 < m0:
        return 0.0
    top = q * m1 + a
    lam = von_mangoldt_array(max(top, 2))
    n = np.arange(q * m0 + a, top + 1, q, dtype=np.int64)
    n = n[lam[n] > 0]
    return math.fsum(float(lam[k]) * factorize((k - a) // q).tau for k in n.tolist())


def titchmarsh_main_term(x: float, q: int, a: int, cutoff: int = DEFAULT_CUTOFF) -> float:
    """(x/q) (C1(a,q) log x + 2 C2(a,q) + C1(a,q) log(q'^2/(e q)))."""
    _check(q, a)
    fam = constant_family(a, q, cutoff)
    c1, c2 = fam.C1.value, fam.C2.value
    rad = factorize(q).radical
    log_shape = 2 * math.log(rad) - 1 - math.log(q)
    return x / q * (c1 * math.log(x) + 2 * c2 + c1 * log_shape)


def titchmarsh_row(x: int, q: int, a: int, cutoff: int = DEFAULT_CUTOFF) -> TitchmarshRow:
    s = titchmarsh_sum(x, q, a)
    mt = titchmarsh_main_term(x, q, a, cutoff)
    return TitchmarshRow(int(x), int(q), int(a), s, mt, s - mt)


def bv_titchmarsh_table(
    x: int,
    Qmax: int,
    a: int,
    lambda_guard: float = DEFAULT_LAMBDA_GUARD,
    override_guard: bool = False,
    threads: int = 1,
    cutoff: int = DEFAULT_CUTOFF,
) -> TitchmarshTable:
    """Rows for q <= Qmax with (q, a) = 1 and the aggregate sum of |error|.

    Moduli sharing a factor with a are skipped and counted. Qmax above
    x**lambda_guard is refused unless ``override_guard`` is set.
    """
    x, Qmax, a = int(x), int(Qmax), int(a)
    if a == 0:
        raise DomainError("a must be nonzero")
    limit = x**lambda_guard
    if Qmax > limit:
        if not override_guard:
            raise DomainError(f"Qmax = {Qmax} exceeds x^{lambda_guard} = {limit:.4g}")
        warnings.warn(f"Qmax = {Qmax} exceeds x^{lambda_guard} = {limit:.4g}; guard overridden", stacklevel=2)
    qs = admissible_moduli(Qmax, a).tolist() if Qmax >= 1 else []
    skipped = max(Qmax, 0) - len(qs)
    _tau(x)
    von_mangoldt_array(x + max(a, 0))
    if threads > 1 and len(qs) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(lambda q: titchmarsh_row(x, q, a, cutoff), qs))
    else:
        rows = [titchmarsh_row(x, q, a, cutoff) for q in qs]
    total = math.fsum(abs(row.error) for row in rows)
    return TitchmarshTable(x, Qmax, a, rows, total, skipped)


@dataclass(frozen=True)
class ExchangeCheck:
    lhs: float  # modulus-first: sum over q of the class tallies
    rhs: float  # n-first: Lambda(n) * coprime divisor count, all divisors
    boundary: float  # part of rhs from divisors q > x/r (nonzero only for a < 0)

    @property
    def rhs_capped(self) -> float:
        return self.rhs - self.boundary


def exchange_identity_check(x: int, r: int, a: int, threads: int = 1) -> ExchangeCheck:
    """Both orders of summation of sum_{q <= x/r, (q,a)=1} sum_{n = a (qr)} Lambda(n).

    The n-first side counts every divisor of (n - a)/r coprime to a; for
    a < 0 some of those exceed x/r and their contribution is reported as
    ``boundary`` so that ``lhs == rhs - boundary``.
    """
    x, r, a = int(x), int(r), int(a)
    if a == 0:
        raise DomainError("a must be nonzero")
    if math.gcd(r, abs(a)) != 1:
        raise DomainError(f"gcd(r, |a|) != 1 for r={r}, a={a}")
    Q = x // r
    qs = admissible_moduli(Q, a)
    lhs = math.fsum(progression_sums(x, r, a, qs, threads).tolist())
    lam = von_mangoldt_array(x)
    idx = np.arange(first_in_class(a, r, abs(a)), x + 1, r, dtype=np.int64)
    idx = idx[lam[idx] > 0]
    full, over = [], []
    for n in idx.tolist():
        k = (n - a) // r
        c_all = coprime_divisor_count(k, k, a)
        c_cap = coprime_divisor_count(k, Q, a)
        full.append(c_all * float(lam[n]))
        if c_all != c_cap:
            over.append((c_all - c_cap) * float(lam[n]))
    return ExchangeCheck(lhs, math.fsum(full), math.fsum(over))
