"""Singular-series constants and the two exact convolution identities.

Every infinite prime sum ``sum_p f(p)`` is split at a cutoff ``P``: primes
``p <= P`` are summed directly (``math.fsum``, increasing ``p``), and the
tail ``sum_{p > P} f(p)`` is evaluated by expanding ``f`` in powers of
``1/p`` and using the prime zeta function and its derivative::

    sum_p p^-s          = sum_n mu(n)/n * log zeta(ns)
    sum_p log(p) p^-s   = -sum_n mu(n) * zeta'(ns)/zeta(ns)

The reported ``tail_bound`` bounds what the truncated expansion leaves out.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Mapping, Union

import mpmath
import numpy as np

from .arith import factorize, primes_upto
from .errors import DomainError

MIN_CUTOFF = 1000
DEFAULT_CUTOFF = 10**6
SERIES_TERMS = 10  # powers of 1/p kept in the tail expansion
_MP_DPS = 40  # mpmath error ~1e-38 sits inside the float roundoff budget

KINDS = ("C1", "C2", "C3", "C5", "C6", "gamma", "zeta_ratio", "prime_sum_phi", "prime_sum_sq")


@dataclass(frozen=True)
class ConstantValue:
    kind: str
    a: int
    r: int
    value: float
    cutoff: int
    tail_bound: float

    def as_dict(self) -> dict:
        return {
            "kind": self.kind,
            "a": self.a,
            "r": self.r,
            "value": self.value,
            "cutoff": self.cutoff,
            "tail_bound": self.tail_bound,
        }


@dataclass(frozen=True)
class ConstantFamily:
    C1: ConstantValue
    C2: ConstantValue
    C3: ConstantValue
    C5: ConstantValue


# ---------------------------------------------------------------------------
# power series in t = 1/p with rational coefficients


def _series_inv(den: list[Fraction], K: int) -> list[Fraction]:
    out = [Fraction(0)] * (K + 1)
    out[0] = 1 / den[0]
    for k in range(1, K + 1):
        acc = sum((den[j] * out[k - j] for j in range(1, min(k, len(den) - 1) + 1)), Fraction(0))
        out[k] = -acc / den[0]
    return out


def _series_mul(a: list[Fraction], b: list[Fraction], K: int) -> list[Fraction]:
    out = [Fraction(0)] * (K + 1)
    for i, ai in enumerate(a[: K + 1]):
        if ai:
            for j, bj in enumerate(b[: K + 1 - i]):
                out[i + j] += ai * bj
    return out


def _series_log1p(u: list[Fraction], K: int) -> list[Fraction]:
    # u has zero constant term
    out = [Fraction(0)] * (K + 1)
    power = [Fraction(1)] + [Fraction(0)] * K
    for j in range(1, K + 1):
        power = _series_mul(power, u, K)
        if not any(power):
            break
        sign = 1 if j % 2 else -1
        for k in range(K + 1):
            out[k] += sign * power[k] / j
    return out


def _rational_series(num: list[int], den: list[int], K: int) -> list[Fraction]:
    return _series_mul([Fraction(c) for c in num], _series_inv([Fraction(c) for c in den], K), K)


@dataclass(frozen=True)
class _PrimeSum:
    """sum_p [log p] * f(p) with f(p) = sum_k coeffs[k] p^-k."""

    name: str
    logged: bool
    terms: Callable[[np.ndarray], np.ndarray]
    coeffs: tuple[Fraction, ...]


def _make_sums() -> dict[str, _PrimeSum]:
    K = 4 * SERIES_TERMS
    # 1/(p(p-1)) = t^2/(1-t)
    u = _rational_series([0, 0, 1], [1, -1], K)
    c1 = _series_log1p(u, K)
    c2 = _rational_series([0, 0, 1], [1, -1, 1], K)  # t^2/(1-t+t^2)
    phi = _rational_series([0, 0, 1], [1, -1], K)
    sq = [Fraction(0)] * (K + 1)
    sq[2] = Fraction(1)

    def log_terms(fn):
        return lambda p: np.log(p) * fn(p)

    return {
        "log_c1": _PrimeSum("log_c1", False, lambda p: np.log1p(1.0 / (p * (p - 1.0))), tuple(c1)),
        "c2": _PrimeSum("c2", True, log_terms(lambda p: 1.0 / (p * p - p + 1.0)), tuple(c2)),
        "phi": _PrimeSum("phi", True, log_terms(lambda p: 1.0 / (p * (p - 1.0))), tuple(phi)),
        "sq": _PrimeSum("sq", True, log_terms(lambda p: 1.0 / (p * p)), tuple(sq)),
    }


_SUMS = _make_sums()


def _mobius(n: int) -> int:
    return factorize(n).mu


@lru_cache(maxsize=None)
def _prime_zeta(s: int, logged: bool) -> mpmath.mpf:
    """P(s) = sum_p p^-s, or -P'(s) = sum_p log p p^-s when ``logged``."""
    with mpmath.workdps(_MP_DPS):
        total = mpmath.mpf(0)
        n = 1
        while True:
            if mpmath.mpf(2) ** (-n * s) < mpmath.mpf(10) ** (-_MP_DPS + 2):
                break
            mu = _mobius(n)
            if mu:
                z = mpmath.zeta(n * s)
                if logged:
                    total -= mu * mpmath.zeta(n * s, 1, 1) / z
                else:
                    total += mpmath.mpf(mu) / n * mpmath.log(z)
            n += 1
        return total


def _tail_remainder_bound(ps: _PrimeSum, P: int) -> float:
    """Bound on sum_{p>P} [log p] sum_{k>SERIES_TERMS} |c_k| p^-k."""
    K = SERIES_TERMS
    B = max(float(abs(c)) for c in ps.coeffs[K + 1 :])
    lp = math.log(P) if ps.logged else 1.0
    # sum_{n>P} log(n) n^-k <= P^(1-k) (log P/(k-1) + 1/(k-1)^2); geometric in k
    per_k = P ** (-K) * (lp / K + 1.0 / K**2)
    return B * per_k / (1.0 - 1.0 / P)


@lru_cache(maxsize=16)
def _prime_sum(name: str, cutoff: int) -> tuple[float, float]:
    """(value, tail_bound) of one of the prime sums at the given cutoff."""
    ps = _SUMS[name]
    primes = primes_upto(cutoff).astype(np.float64)
    partial = math.fsum(ps.terms(primes).tolist())
    with mpmath.workdps(_MP_DPS):
        tail = mpmath.mpf(0)
        for k in range(2, SERIES_TERMS + 1):
            c = ps.coeffs[k]
            if not c:
                continue
            pk = primes ** (-float(k))
            head = math.fsum((np.log(primes) * pk).tolist() if ps.logged else pk.tolist())
            t_k = _prime_zeta(k, ps.logged) - mpmath.mpf(head)
            tail += mpmath.mpf(c.numerator) / c.denominator * t_k
        value = float(mpmath.mpf(partial) + tail)
    return value, _tail_remainder_bound(ps, cutoff)


def _check_cutoff(cutoff: int) -> int:
    cutoff = int(cutoff)
    if cutoff < MIN_CUTOFF:
        raise DomainError(f"cutoff must be >= {MIN_CUTOFF}, got {cutoff}")
    return cutoff


# ---------------------------------------------------------------------------
# elementary constants


@lru_cache(maxsize=16)
def euler_gamma(cutoff: int = DEFAULT_CUTOFF) -> ConstantValue:
    """Euler's constant from H_N by Euler-Maclaurin; remainder < 1/(252 N^6)."""
    N = _check_cutoff(cutoff)
    h = math.fsum((1.0 / np.arange(1, N + 1, dtype=np.float64)).tolist())
    value = h - math.log(N) - 1 / (2 * N) + 1 / (12 * N**2) - 1 / (120 * N**4)
    return ConstantValue("gamma", 1, 1, value, N, 1.0 / (252.0 * N**6))


def _zeta_series(s: int, N: int) -> tuple[float, float]:
    """zeta(s) from sum_{n<=N} n^-s plus the midpoint of the integral bracket."""
    n = np.arange(1, N + 1, dtype=np.float64)
    head = math.fsum((n ** (-float(s))).tolist())
    upper = N ** (1 - s) / (s - 1)
    lower = (N + 1) ** (1 - s) / (s - 1)
    return head + (upper + lower) / 2, (upper - lower) / 2


@lru_cache(maxsize=4)
def zeta_ratio(n_terms: int = DEFAULT_CUTOFF) -> ConstantValue:
    """zeta(2) zeta(3) / zeta(6) from directly summed Dirichlet series.

    Independent of the Euler-product route used for C1.
    """
    N = _check_cutoff(n_terms)
    z2, e2 = _zeta_series(2, N)
    z3, e3 = _zeta_series(3, N)
    z6, e6 = _zeta_series(6, N)
    value = z2 * z3 / z6
    rel = e2 / z2 + e3 / z3 + e6 / (z6 - e6)
    return ConstantValue("zeta_ratio", 1, 1, value, N, value * rel * 1.001)


def prime_sum_phi(cutoff: int = DEFAULT_CUTOFF) -> ConstantValue:
    """sum_p log p / (p(p-1))."""
    v, b = _prime_sum("phi", _check_cutoff(cutoff))
    return ConstantValue("prime_sum_phi", 1, 1, v, cutoff, b)


def prime_sum_sq(cutoff: int = DEFAULT_CUTOFF) -> ConstantValue:
    """sum_p log p / p^2."""
    v, b = _prime_sum("sq", _check_cutoff(cutoff))
    return ConstantValue("prime_sum_sq", 1, 1, v, cutoff, b)


# ---------------------------------------------------------------------------
# C1, C2, C3, C5, C6


def _check_pair(a: int, r: int) -> None:
    if a == 0:
        raise DomainError("a must be nonzero")
    if r < 1:
        raise DomainError(f"r must be positive, got {r}")
    if math.gcd(abs(a), r) != 1:
        raise DomainError(f"gcd(|a|, r) = {math.gcd(abs(a), r)} != 1 for a={a}, r={r}")


def c1_rational(a: int, r: int) -> Fraction:
    """C1(a, r) divided by zeta(2)zeta(3)/zeta(6), exactly."""
    out = Fraction(1)
    for p in factorize(abs(a)).primes:
        out *= 1 - Fraction(p, p * p - p + 1)
    for p in factorize(r).primes:
        out *= 1 + Fraction(p - 1, p * p - p + 1)
    return out


def _c2_bracket_finite(a: int, r: int) -> float:
    terms = [p * p * math.log(p) / ((p - 1) * (p * p - p + 1)) for p in factorize(abs(a)).primes]
    terms += [-(p - 1) * p * math.log(p) / (p * p - p + 1) for p in factorize(r).primes]
    return math.fsum(terms)


def c5(r: int = 1, cutoff: int = DEFAULT_CUTOFF) -> ConstantValue:
    """C5(r) = (log 2pi + 1 + gamma + sum_p log p/(p(p-1)) + sum_{p|r} log p/p) / 2."""
    if r < 1:
        raise DomainError(f"r must be positive, got {r}")
    cutoff = _check_cutoff(cutoff)
    g = euler_gamma(cutoff)
    s = prime_sum_phi(cutoff)
    local = math.fsum(math.log(p) / p for p in factorize(r).primes)
    value = 0.5 * math.fsum([math.log(2 * math.pi), 1.0, g.value, s.value, local])
    return ConstantValue("C5", 1, r, value, cutoff, 0.5 * (g.tail_bound + s.tail_bound))


def constant_family(a: int = 1, r: int = 1, cutoff: int = DEFAULT_CUTOFF) -> ConstantFamily:
    """C1(a,r), C2(a,r), C3(a,r) and C5(r) at the given prime cutoff."""
    _check_pair(a, r)
    cutoff = _check_cutoff(cutoff)
    log_c, b_log = _prime_sum("log_c1", cutoff)
    s2, b_s2 = _prime_sum("c2", cutoff)
    g = euler_gamma(cutoff)

    base = math.exp(log_c)
    rat = c1_rational(a, r)
    c1v = base * rat.numerator / rat.denominator
    c1b = abs(c1v) * math.expm1(b_log)

    bracket = math.fsum([g.value, -s2, _c2_bracket_finite(a, r)])
    c2v = c1v * bracket
    c2b = c1b * abs(bracket) + abs(c1v) * (g.tail_bound + b_s2)
    c3v = c2v - c1v
    c3b = c2b + c1b
    return ConstantFamily(
        C1=ConstantValue("C1", a, r, c1v, cutoff, c1b),
        C2=ConstantValue("C2", a, r, c2v, cutoff, c2b),
        C3=ConstantValue("C3", a, r, c3v, cutoff, c3b),
        C5=c5(r, cutoff),
    )


def c6(cutoff: int = DEFAULT_CUTOFF) -> ConstantValue:
    """C6 = C5(1) + 1/2 + (1/2) sum_p log p / p^2."""
    five = c5(1, cutoff)
    sq = prime_sum_sq(cutoff)
    value = math.fsum([five.value, 0.5, 0.5 * sq.value])
    return ConstantValue("C6", 1, 1, value, five.cutoff, five.tail_bound + 0.5 * sq.tail_bound)


def constant(kind: str, a: int = 1, r: int = 1, cutoff: int = DEFAULT_CUTOFF) -> ConstantValue:
    """Look up any supported constant by kind."""
    if kind in ("C1", "C2", "C3"):
        return getattr(constant_family(a, r, cutoff), kind)
    if kind == "C5":
        return c5(r, cutoff)
    if kind == "C6":
        return c6(cutoff)
    if kind == "gamma":
        return euler_gamma(cutoff)
    if kind == "zeta_ratio":
        return zeta_ratio(cutoff)
    if kind == "prime_sum_phi":
        return prime_sum_phi(cutoff)
    if kind == "prime_sum_sq":
        return prime_sum_sq(cutoff)
    raise DomainError(f"unknown constant kind {kind!r}; expected one of {KINDS}")


# ---------------------------------------------------------------------------
# exact identity checks

GAMMA_TERM = "gamma-S"


@dataclass(frozen=True)
class IdentityCheck:
    lhs: dict[str, Fraction]
    rhs: dict[str, Fraction]
    equal: bool


def _squarefree_primes(r: int) -> tuple[int, ...]:
    if r < 1:
        raise DomainError(f"r must be positive, got {r}")
    f = factorize(r)
    if f.mu == 0:
        raise DomainError(f"r = {r} is not squarefree")
    return f.primes


def _c_form(a: int, r: int, i: int) -> dict[str, Fraction]:
    """C_i(a, r) / (zeta(2)zeta(3)/zeta(6)) as exact coefficients.

    For i = 1 the only basis element is ``"1"``. For i = 2 the basis is
    ``gamma - sum_p log p/(p^2-p+1)`` (key ``GAMMA_TERM``) and ``log p``
    (key ``"log(p)"``) for each prime p involved; the coefficients are
    rational, so both sides can be compared without rounding.
    """
    rat = c1_rational(a, r)
    if i == 1:
        return {"1": rat}
    form = {GAMMA_TERM: rat}
    for p in factorize(abs(a)).primes:
        form[f"log({p})"] = rat * Fraction(p * p, (p - 1) * (p * p - p + 1))
    for p in factorize(r).primes:
        form[f"log({p})"] = -rat * Fraction((p - 1) * p, p * p - p + 1)
    return form


def _clean(form: dict[str, Fraction]) -> dict[str, Fraction]:
    return {k: v for k, v in sorted(form.items()) if v != 0}


def mobius_convolution_check(a: int, r: int, i: int) -> IdentityCheck:
    """Check C_i(a,r)/r == sum_{d|r} mu(d) C_i(ad) in exact arithmetic."""
    if i not in (1, 2):
        raise DomainError(f"i must be 1 or 2, got {i}")
    primes = _squarefree_primes(r)
    _check_pair(a, r)
    lhs = {k: v / r for k, v in _c_form(a, r, i).items()}
    rhs: dict[str, Fraction] = {}
    for mask in range(1 << len(primes)):
        d = 1
        bits = 0
        for j, p in enumerate(primes):
            if mask >> j & 1:
                d *= p
                bits += 1
        sign = -1 if bits % 2 else 1
        for k, v in _c_form(a * d, 1, i).items():
            rhs[k] = rhs.get(k, Fraction(0)) + sign * v
    lhs, rhs = _clean(lhs), _clean(rhs)
    return IdentityCheck(lhs, rhs, lhs == rhs)


PrimeMap = Union[Mapping[int, Fraction], Callable[[int], Fraction]]


def _lookup(fn: PrimeMap, p: int) -> Fraction:
    v = fn[p] if isinstance(fn, Mapping) else fn(p)
    return Fraction(v)


@dataclass(frozen=True)
class SumCheck:
    lhs: Fraction
    rhs: Fraction
    equal: bool


def mult_additive_identity_check(r: int, f: PrimeMap, g: PrimeMap) -> SumCheck:
    """sum_{d|r} f(d) g(d) against prod_{p|r}(1+f(p)) * sum_{p|r} g(p)f(p)/(1+f(p)).

    ``f`` is extended multiplicatively and ``g`` additively from their
    values on the primes dividing the squarefree ``r``.
    """
    primes = _squarefree_primes(r)
    fv = {p: _lookup(f, p) for p in primes}
    gv = {p: _lookup(g, p) for p in primes}
    for p, v in fv.items():
        if v == -1:
            raise DomainError(f"f({p}) = -1 is a pole of the closed form")
    lhs = Fraction(0)
    for mask in range(1 << len(primes)):
        fd, gd = Fraction(1), Fraction(0)
        for j, p in enumerate(primes):
            if mask >> j & 1:
                fd *= fv[p]
                gd += gv[p]
        lhs += fd * gd
    prod = Fraction(1)
    for p in primes:
        prod *= 1 + fv[p]
    rhs = prod * sum((gv[p] * fv[p] / (1 + fv[p]) for p in primes), Fraction(0))
    return SumCheck(lhs, rhs, lhs == rhs)
