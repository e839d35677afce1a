"""Exact integer arithmetic: factorization, multiplicative functions and
divisor counting.

Single integers go through :func:`factorize`; bulk work (``phi`` or ``tau``
over a whole range) goes through the numpy tables at the bottom of the
module, which the tests cross-check against :func:`factorize`.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable

import numpy as np

from .errors import DomainError

MAX_FACTOR_INPUT = 2**63

_SMALL_PRIMES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)
_TRIAL_LIMIT = 1000


@dataclass(frozen=True)
class Factorization:
    """A positive integer with its prime factorization and derived values."""

    n: int
    factors: tuple[tuple[int, int], ...]
    radical: int = field(init=False)
    omega: int = field(init=False)
    mu: int = field(init=False)
    phi: int = field(init=False)
    tau: int = field(init=False)

    def __post_init__(self):
        radical = 1
        phi = 1
        tau = 1
        squarefree = True
        for p, e in self.factors:
            radical *= p
            phi *= (p - 1) * p ** (e - 1)
            tau *= e + 1
            if e >= 2:
                squarefree = False
        omega = len(self.factors)
        object.__setattr__(self, "radical", radical)
        object.__setattr__(self, "omega", omega)
        object.__setattr__(self, "mu", (-1) ** omega if squarefree else 0)
        object.__setattr__(self, "phi", phi)
        object.__setattr__(self, "tau", tau)

    @property
    def primes(self) -> tuple[int, ...]:
        return tuple(p for p, _ in self.factors)

    @property
    def is_prime_power(self) -> bool:
        return self.omega == 1

    @property
    def von_mangoldt(self) -> float:
        """log p if n = p^e, else 0."""
        return math.log(self.factors[0][0]) if self.omega == 1 else 0.0


def is_probable_prime(n: int) -> bool:
    """Deterministic Miller-Rabin for n < 3.3e24 (covers all 64-bit inputs)."""
    if n < 2:
        return False
    for p in _SMALL_PRIMES:
        if n % p == 0:
            return n == p
    d = n - 1
    s = 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for b in _SMALL_PRIMES:
        x = pow(b, d, n)
        if x == 1 or x == n - 1:
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def _pollard_brent(n: int, rng: random.Random) -> int:
    """Return a nontrivial factor of the odd composite n."""
    while True:
        y = rng.randrange(1, n)
        c = rng.randrange(1, n)
        m = 128
        g = r = q = 1
        x = ys = y
        while g == 1:
            x = y
            for _ in range(r):
                y = (y * y + c) % n
            k = 0
            while k < r and g == 1:
                ys = y
                for _ in range(min(m, r - k)):
                    y = (y * y + c) % n
                    q = q * abs(x - y) % n
                g = math.gcd(q, n)
                k += m
            r *= 2
        if g == n:
            g = 1
            while g == 1:
                ys = (ys * ys + c) % n
                g = math.gcd(abs(x - ys), n)
        if g != n:
            return g


def _split(n: int, out: dict[int, int], rng: random.Random) -> None:
    if n == 1:
        return
    if is_probable_prime(n):
        out[n] = out.get(n, 0) + 1
        return
    d = _pollard_brent(n, rng)
    _split(d, out, rng)
    _split(n // d, out, rng)


@lru_cache(maxsize=65536)
def factorize(n: int) -> Factorization:
    """Factor ``n`` (1 <= n <= 2**63).

    Trial division up to 1000, then Miller-Rabin and Pollard-Brent on the
    cofactor. The Pollard RNG is seeded so results never depend on state.
    """
    n = int(n)
    if n <= 0:
        raise DomainError(f"factorize requires n >= 1, got {n}")
    if n > MAX_FACTOR_INPUT:
        raise DomainError(f"factorize supports n <= 2**63, got {n}")
    found: dict[int, int] = {}
    m = n
    for p in range(2, _TRIAL_LIMIT):
        if p * p > m:
            break
        if m % p == 0:
            e = 0
            while m % p == 0:
                m //= p
                e += 1
            found[p] = e
    if m > 1:
        if m < _TRIAL_LIMIT * _TRIAL_LIMIT:
            found[m] = found.get(m, 0) + 1
        else:
            _split(m, found, random.Random(m))
    return Factorization(n, tuple(sorted(found.items())))


def divisor_list(n: int) -> list[int]:
    """All positive divisors of n in increasing order."""
    divs = [1]
    for p, e in factorize(n).factors:
        pk = [p**k for k in range(1, e + 1)]
        divs = divs + [d * q for d in divs for q in pk]
    return sorted(divs)


def _strip(n: int, a: int) -> int:
    """Largest divisor of n coprime to a."""
    g = math.gcd(n, a)
    while g > 1:
        n //= g
        g = math.gcd(n, g)
    return n


def coprime_divisor_count(n: int, Q: int | float, a: int) -> int:
    """#{d : d | n, d <= Q, gcd(d, |a|) = 1}."""
    if n <= 0:
        raise DomainError(f"coprime_divisor_count requires n >= 1, got {n}")
    if a == 0:
        raise DomainError("a must be nonzero")
    m = _strip(n, abs(a))
    fac = factorize(m)
    if Q >= m:
        return fac.tau
    if Q < 1:
        return 0
    return sum(1 for d in divisor_list(m) if d <= Q)


def radical(n: int) -> int:
    return factorize(n).radical


def prime_factors(n: int) -> tuple[int, ...]:
    """Distinct primes dividing |n| (empty for n = +-1)."""
    return factorize(abs(n)).primes


def von_mangoldt(n: int) -> float:
    return factorize(n).von_mangoldt


def phi_ratio(a: int) -> float:
    """phi(|a|)/|a|."""
    f = factorize(abs(a))
    return f.phi / f.n


def primes_upto(n: int) -> np.ndarray:
    """Primes p <= n as an int64 array (plain Eratosthenes)."""
    if n < 2:
        return np.zeros(0, dtype=np.int64)
    flags = np.ones(n + 1, dtype=bool)
    flags[:2] = False
    flags[4::2] = False
    for p in range(3, math.isqrt(n) + 1, 2):
        if flags[p]:
            flags[p * p :: 2 * p] = False
    return np.flatnonzero(flags).astype(np.int64)


def phi_table(n: int) -> np.ndarray:
    """phi(k) for 0 <= k <= n (phi(0) set to 0)."""
    phi = np.arange(n + 1, dtype=np.int64)
    for p in primes_upto(n).tolist():
        phi[p::p] -= phi[p::p] // p
    return phi


@lru_cache(maxsize=4)
def _phi_bucket(size: int) -> np.ndarray:
    table = phi_table(size)
    table.flags.writeable = False
    return table


def cached_phi_table(n: int) -> np.ndarray:
    """Read-only phi table covering at least 0..n (sizes 16 * 10^k, memoized)."""
    size = 16
    while size < n:
        size *= 10
    return _phi_bucket(size)


def tau_table(n: int) -> np.ndarray:
    """tau(k) for 0 <= k <= n, by pairing divisors d < k/d (tau(0) = 0)."""
    tau = np.zeros(n + 1, dtype=np.int64)
    for d in range(1, math.isqrt(n) + 1):
        sq = d * d
        tau[sq] += 1
        tau[sq + d :: d] += 2
    return tau


def spf_table(n: int) -> np.ndarray:
    """Smallest prime factor of k for 0 <= k <= n (0 and 1 map to themselves)."""
    spf = np.arange(n + 1, dtype=np.int64)
    for p in range(2, math.isqrt(n) + 1):
        if spf[p] == p:
            block = spf[p * p :: p]
            mask = block == np.arange(p * p, n + 1, p)
            block[mask] = p
    return spf


def coprime_mask(values: Iterable[int] | np.ndarray, a: int) -> np.ndarray:
    """Boolean mask of entries coprime to |a|."""
    arr = np.asarray(values, dtype=np.int64)
    mask = np.ones(arr.shape, dtype=bool)
    for p in prime_factors(a):
        mask &= arr % p != 0
    return mask
