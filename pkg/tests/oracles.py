"""Brute-force reference implementations and frozen reference values.

Nothing here imports bfilab. The functions favour obviousness over speed:
trial division, gcd counting and per-n enumeration.
"""

from __future__ import annotations

import math
from fractions import Fraction

# Computed once with mpmath (30 digits) from mpmath.primezeta and its numerical
# derivative: sum_p log p p^-k = -P'(k), expanded in powers of 1/p.
S_PHI = 0.7553666108316880211593  # sum_p log p / (p(p-1))
S_SQ = 0.4930911093687644621978  # sum_p log p / p^2
S_C2 = 0.6083817178633247226838  # sum_p log p / (p^2 - p + 1)
EULER_GAMMA = 0.5772156649015328606065
ZETA_RATIO = 1.943596436820759205057  # zeta(2) zeta(3) / zeta(6)
C2_11 = -0.06057422948630573216097
C5_1 = 2.085229671071283182663
C6 = 2.831775225755665413762


def trial_factor(n: int) -> dict[int, int]:
    out: dict[int, int] = {}
    d = 2
    while d * d <= n:
        while n % d == 0:
            out[d] = out.get(d, 0) + 1
            n //= d
        d += 1
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def is_prime(n: int) -> bool:
    return n >= 2 and trial_factor(n) == {n: 1}


def lam(n: int) -> float:
    if n < 2:
        return 0.0
    f = trial_factor(n)
    return math.log(next(iter(f))) if len(f) == 1 else 0.0


def phi(n: int) -> int:
    return sum(1 for k in range(1, n + 1) if math.gcd(k, n) == 1)


def divisors(n: int) -> list[int]:
    return [d for d in range(1, n + 1) if n % d == 0]


def tau(n: int) -> int:
    return len(divisors(n))


def psi_ap(x: int, q: int, a: int, lo: int) -> float:
    """sum of Lambda(n) over lo < n <= x, n = a mod q."""
    return math.fsum(lam(n) for n in range(lo + 1, x + 1) if (n - a) % q == 0)


def delta_brute(x: int, r: int, Q: int, a: int) -> float:
    """Per-n pass: every n in (|a|, x] credits each admissible q with qr | n - a."""
    qs = [q for q in range(1, Q + 1) if math.gcd(q, abs(a)) == 1]
    terms = []
    for n in range(abs(a) + 1, x + 1):
        ln = lam(n)
        if ln == 0.0:
            continue
        for q in qs:
            if (n - a) % (q * r) == 0:
                terms.append(ln)
    terms.extend(-x / phi(q * r) for q in qs)
    return math.fsum(terms)


def titchmarsh_brute(x: int, q: int, a: int) -> float:
    return math.fsum(
        lam(q * m + a) * tau(m) for m in range(1, x // q + 1) if q * m > abs(a)
    )


def rad(n: int) -> int:
    return math.prod(trial_factor(n))


def c1_rational(a: int, r: int) -> Fraction:
    out = Fraction(1)
    for p in trial_factor(abs(a)):
        out *= Fraction(p * p - 2 * p + 1, p * p - p + 1)
    for p in trial_factor(r):
        out *= Fraction(p * p, p * p - p + 1)
    return out


def c1(a: int, r: int) -> float:
    q = c1_rational(a, r)
    return ZETA_RATIO * q.numerator / q.denominator


def c2(a: int, r: int) -> float:
    bracket = EULER_GAMMA - S_C2
    for p in trial_factor(abs(a)):
        bracket += p * p * math.log(p) / ((p - 1) * (p * p - p + 1))
    for p in trial_factor(r):
        bracket -= (p - 1) * p * math.log(p) / (p * p - p + 1)
    return c1(a, r) * bracket


def c5(r: int) -> float:
    return C5_1 + 0.5 * sum(math.log(p) / p for p in trial_factor(r))


def divisors_by_factoring(n: int) -> list[int]:
    divs = [1]
    for p, e in trial_factor(n).items():
        divs = [d * p**k for d in divs for k in range(e + 1)]
    return divs


def inner_sums_single_pass(x: int, budgets: dict[int, int], a: int) -> dict[int, float]:
    """For each r: sum over q <= budgets[r], (q,a)=1 of (class tally - x/phi(qr)).

    One pass over prime powers n in (|a|, x]; each n credits every pair
    (q, r) with qr | n - a.
    """
    credits: dict[int, list[float]] = {r: [] for r in budgets}
    for n in range(abs(a) + 1, x + 1):
        ln = lam(n)
        if ln == 0.0:
            continue
        for d in divisors_by_factoring(n - a):
            for r, Q in budgets.items():
                if d % r == 0:
                    q = d // r
                    if q <= Q and math.gcd(q, abs(a)) == 1:
                        credits[r].append(ln)
    out = {}
    for r, Q in budgets.items():
        mains = [-x / phi_fast(q * r) for q in range(1, Q + 1) if math.gcd(q, abs(a)) == 1]
        out[r] = math.fsum(credits[r] + mains)
    return out


def phi_fast(n: int) -> int:
    out = n
    for p in trial_factor(n):
        out -= out // p
    return out
