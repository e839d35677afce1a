"""Chebyshev tallies in arithmetic progressions and their modulus averages.

``delta_sum`` has two independent routes: ``stepping`` walks each class
``a mod qr`` through the von Mangoldt table, ``divisor_transform`` walks the
prime powers ``n = a mod r`` once and counts the admissible moduli dividing
``(n - a)/r``. ``divisor_switch_check`` enumerates both sides of the
``p = a + qrs`` reparametrisation and reports the boundary pairs.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .arith import cached_phi_table, coprime_divisor_count, coprime_mask, factorize
from .errors import DomainError, InvariantError
from .sieve import sieve_tables, von_mangoldt_array

METHODS = ("stepping", "divisor_transform")
_CHUNK = 2048  # moduli per work unit; fixed so results never depend on thread count


@dataclass(frozen=True)
class ProgressionTally:
    x: int
    q: int
    a: int
    psi: float
    theta: float
    prime_count: int
    above_abs_a: bool  # True: |a| < n <= x; False: 1 <= n <= x
    prime_power_counts: dict[int, int] = field(default_factory=dict, repr=False, compare=False)


def first_in_class(a: int, m: int, above: int) -> int:
    """Smallest n > above with n = a (mod m)."""
    n = above + 1
    return n + (a - n) % m


def _psi_from_counts(counts: dict[int, int]) -> float:
    return math.fsum(k * math.log(p) for p, k in sorted(counts.items()))


def psi(x: int, q: int, a: int, above_abs_a: bool = True) -> ProgressionTally:
    """psi(x; q, a) and theta(x; q, a).

    With ``above_abs_a`` the tally runs over |a| < n <= x, otherwise over
    1 <= n <= x. ``psi`` is evaluated from exact per-prime multiplicities,
    so tallies over a complete residue system add up to the full tally
    bit for bit.
    """
    x, q, a = int(x), int(q), int(a)
    if x < 2:
        raise DomainError(f"x must be >= 2, got {x}")
    if q < 1:
        raise DomainError(f"q must be >= 1, got {q}")
    seg = sieve_tables(x)
    start = first_in_class(a, q, abs(a) if above_abs_a else 0)
    idx = np.arange(start, x + 1, q, dtype=np.int64)
    primes = idx[seg.is_prime[idx]] if len(idx) else idx
    counts = {int(p): 1 for p in primes.tolist()}
    theta = math.fsum(math.log(p) for p in sorted(counts))
    rows = seg.prime_powers
    if len(rows):
        sel = rows[(rows[:, 0] >= start) & (rows[:, 0] <= x) & ((rows[:, 0] - a) % q == 0)]
        for p in sel[:, 1].tolist():
            counts[p] = counts.get(p, 0) + 1
    return ProgressionTally(
        x, q, a, _psi_from_counts(counts), theta, len(primes), above_abs_a, counts
    )


def _check_delta_args(x: int, r: int, Qmax: int, a: int) -> None:
    if a == 0:
        raise DomainError("a must be nonzero")
    if r < 1:
        raise DomainError(f"r must be positive, got {r}")
    if math.gcd(r, abs(a)) != 1:
        raise DomainError(f"gcd(r, |a|) != 1 for r={r}, a={a}")
    if Qmax * r > x:
        raise DomainError(f"Qmax * r = {Qmax * r} exceeds x = {x}")


def admissible_moduli(Qmax: int, a: int) -> np.ndarray:
    q = np.arange(1, Qmax + 1, dtype=np.int64)
    return q[coprime_mask(q, a)]


def main_term_sum(x: float, r: int, qs: np.ndarray) -> float:
    """x * sum_q 1/phi(qr), compensated, increasing q."""
    if len(qs) == 0:
        return 0.0
    phi = cached_phi_table(int(qs[-1]) * r)[qs * r].astype(np.float64)
    return math.fsum((x / phi).tolist())


def _stepping_chunk(lam: np.ndarray, x: int, r: int, a: int, qs: np.ndarray) -> list[float]:
    out = []
    lo = abs(a)
    for q in qs.tolist():
        m = q * r
        out.append(float(np.sum(lam[first_in_class(a, m, lo) : x + 1 : m])))
    return out


def progression_sums(x: int, r: int, a: int, qs: np.ndarray, threads: int = 1) -> np.ndarray:
    """Per-modulus tallies sum_{|a| < n <= x, n = a (qr)} Lambda(n) for each q."""
    lam = von_mangoldt_array(x)
    chunks = [qs[i : i + _CHUNK] for i in range(0, len(qs), _CHUNK)]
    if threads > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda c: _stepping_chunk(lam, x, r, a, c), chunks))
    else:
        parts = [_stepping_chunk(lam, x, r, a, c) for c in chunks]
    return np.array([v for part in parts for v in part], dtype=np.float64)


def _transform_lambda_part(x: int, r: int, Qmax: int, a: int) -> float:
    lam = von_mangoldt_array(x)
    start = first_in_class(a, r, abs(a))
    idx = np.arange(start, x + 1, r, dtype=np.int64)
    idx = idx[lam[idx] > 0]
    terms = []
    for n in idx.tolist():
        c = coprime_divisor_count((n - a) // r, Qmax, a)
        if c:
            terms.append(c * float(lam[n]))
    return math.fsum(terms)


def delta_sum(
    x: int,
    r: int,
    Qmax: int,
    a: int,
    method: str = "stepping",
    threads: int = 1,
    subtract_lambda_a: bool = False,
) -> float:
    """sum_{q <= Qmax, (q,a)=1} (sum_{|a|<n<=x, n=a (qr)} Lambda(n) - x/phi(qr)).

    The tally over |a| < n <= x is the class sum with the fixed prime power
    n = |a| removed, i.e. psi(x; qr, a) - Lambda(a). ``subtract_lambda_a``
    additionally removes Lambda(|a|) once per modulus (a second removal,
    kept only for comparison).
    """
    x, r, Qmax, a = int(x), int(r), int(Qmax), int(a)
    if method not in METHODS:
        raise DomainError(f"method must be one of {METHODS}, got {method!r}")
    _check_delta_args(x, r, Qmax, a)
    if Qmax < 1:
        return 0.0
    qs = admissible_moduli(Qmax, a)
    if method == "stepping":
        lam_part = math.fsum(progression_sums(x, r, a, qs, threads).tolist())
    else:
        lam_part = _transform_lambda_part(x, r, Qmax, a)
    terms = [lam_part, -main_term_sum(x, r, qs)]
    if subtract_lambda_a:
        terms.append(-len(qs) * factorize(abs(a)).von_mangoldt)
    return math.fsum(terms)


# ---------------------------------------------------------------------------
# divisor switching


@dataclass
class SwitchReport:
    x: int
    r: int
    P: float
    a: int
    lhs: float
    rhs: float
    diff: float
    lhs_pairs: list[tuple[int, int]]
    rhs_pairs: list[tuple[int, int]]
    unmatched: list[dict]
    bound: float

    def as_dict(self) -> dict:
        return {
            "x": self.x,
            "r": self.r,
            "P": self.P,
            "a": self.a,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "diff": self.diff,
            "bound": self.bound,
            "lhs_pairs": [list(p) for p in self.lhs_pairs],
            "rhs_pairs": [list(p) for p in self.rhs_pairs],
            "unmatched": self.unmatched,
        }


class _SwitchRanges:
    """Exact membership tests for both sides of the switch."""

    def __init__(self, x: int, r: int, P: Fraction, a: int):
        self.x, self.r, self.P, self.a = x, r, P, a

    def lhs_violations(self, p: int, q: int) -> list[str]:
        x, r, P, a = self.x, self.r, self.P, self.a
        bad = []
        if not Fraction(x) / (r * P) < q:
            bad.append("q > x/(rP)")
        if not q * r <= x:
            bad.append("q <= x/r")
        if math.gcd(q, abs(a)) != 1:
            bad.append("(q,a) = 1")
        if not abs(a) < p <= x:
            bad.append("|a| < p <= x")
        return bad

    def rhs_violations(self, p: int, s: int) -> list[str]:
        x, P, a = self.x, self.P, self.a
        bad = []
        if s < 1:
            bad.append("s >= 1")
        if not s < P - a * P / x:
            bad.append("s < P - aP/x")
        if math.gcd(s, abs(a)) != 1:
            bad.append("(s,a) = 1")
        if not s * Fraction(x) / P + a <= p:
            bad.append("p >= sx/P + a")
        if not p <= x:
            bad.append("p <= x")
        return bad


def divisor_switch_check(x: int, r: int, P: float, a: int, enforce_bound: bool = True) -> SwitchReport:
    """Enumerate both sides of the divisor switch p = a + qrs.

    LHS: pairs (p, q) with x/(rP) < q <= x/r, (q,a) = 1, p prime,
    |a| < p <= x, p = a (mod qr).
    RHS: pairs (p, s) with 1 <= s < P - aP/x, (s,a) = 1, p prime,
    sx/P + a <= p <= x, p = a (mod sr).

    Each pair without a partner on the other side is listed in
    ``unmatched`` with the constraints its partner violates.
    """
    x, r, a = int(x), int(r), int(a)
    if a == 0:
        raise DomainError("a must be nonzero")
    if r < 1:
        raise DomainError(f"r must be positive, got {r}")
    if math.gcd(r, abs(a)) != 1:
        raise DomainError(f"gcd(r, |a|) != 1 for r={r}, a={a}")
    Pf = Fraction(P)
    if Pf < 2:
        raise DomainError(f"P must be >= 2, got {P}")
    bound = 4 * math.log(x) ** 2
    ranges = _SwitchRanges(x, r, Pf, a)
    q_lo = math.floor(Fraction(x) / (r * Pf)) + 1
    q_hi = x // r
    if q_lo > q_hi:
        return SwitchReport(x, r, float(P), a, 0.0, 0.0, 0.0, [], [], [], bound)

    flags = sieve_tables(x).is_prime
    lhs_pairs: list[tuple[int, int]] = []
    for q in range(q_lo, q_hi + 1):
        if math.gcd(q, abs(a)) != 1:
            continue
        m = q * r
        idx = np.arange(first_in_class(a, m, abs(a)), x + 1, m, dtype=np.int64)
        lhs_pairs.extend((int(p), q) for p in idx[flags[idx]].tolist())

    rhs_pairs: list[tuple[int, int]] = []
    s = 1
    while s < Pf - a * Pf / x:
        if math.gcd(s, abs(a)) == 1:
            m = s * r
            low = math.ceil(s * Fraction(x) / Pf + a)
            idx = np.arange(first_in_class(a, m, max(low, 2) - 1), x + 1, m, dtype=np.int64)
            rhs_pairs.extend((int(p), s) for p in idx[flags[idx]].tolist())
        s += 1

    lhs_set = set(lhs_pairs)
    rhs_set = set(rhs_pairs)
    unmatched = []
    for p, q in lhs_pairs:
        s_ = (p - a) // (q * r)
        if (p, s_) not in rhs_set:
            unmatched.append(
                {"side": "lhs", "p": p, "q": q, "s": s_, "violates": ranges.rhs_violations(p, s_)}
            )
    for p, s_ in rhs_pairs:
        q = (p - a) // (s_ * r)
        if (p, q) not in lhs_set:
            unmatched.append(
                {"side": "rhs", "p": p, "q": q, "s": s_, "violates": ranges.lhs_violations(p, q)}
            )
    unmatched.sort(key=lambda u: (u["p"], u["side"], u["q"]))

    lhs = math.fsum(math.log(p) for p, _ in lhs_pairs)
    rhs = math.fsum(math.log(p) for p, _ in rhs_pairs)
    report = SwitchReport(
        x, r, float(P), a, lhs, rhs, rhs - lhs, lhs_pairs, rhs_pairs, unmatched, bound
    )
    if enforce_bound and abs(report.diff) > bound:
        raise InvariantError("switch boundary bound", f"|diff| = {abs(report.diff)} > 4 log^2 x = {bound}")
    return report
