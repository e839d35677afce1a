"""Segmented sieve of Eratosthenes producing von Mangoldt values.

A :class:`SieveSegment` keeps the exact prime-power structure alongside the
float ``lam`` array: prime flags plus ``(n, p, e)`` records for the proper
prime powers ``e >= 2``. ``lam`` is always re-derivable from those.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from .arith import primes_upto
from .errors import DomainError, ResourceError

if TYPE_CHECKING:
    from .cache import SieveCache

DEFAULT_WIDTH = 2**20
MAX_HI = 2**40
MAX_LENGTH = 2**28  # integers per request; ~2.5 GiB of arrays at the limit


@dataclass
class SieveSegment:
    """Von Mangoldt data on the half-open interval [lo, hi)."""

    lo: int
    hi: int
    lam: np.ndarray  # float64, natural logs
    is_prime: np.ndarray  # bool
    prime_powers: np.ndarray  # int64 rows (n, p, e), e >= 2, increasing n

    def __len__(self) -> int:
        return self.hi - self.lo

    def lambda_at(self, n: int) -> float:
        return float(self.lam[n - self.lo])

    def prime_at(self, n: int) -> bool:
        return bool(self.is_prime[n - self.lo])

    def prime_power_at(self, n: int) -> tuple[int, int] | None:
        """(p, e) if n = p^e with e >= 1, else None."""
        if self.is_prime[n - self.lo]:
            return (n, 1)
        rows = self.prime_powers
        i = np.searchsorted(rows[:, 0], n) if len(rows) else 0
        if i < len(rows) and rows[i, 0] == n:
            return int(rows[i, 1]), int(rows[i, 2])
        return None

    def primes(self) -> np.ndarray:
        return np.flatnonzero(self.is_prime) + self.lo

    def psi(self) -> float:
        """Sum of lam over the segment (pairwise summation)."""
        return float(np.sum(self.lam))


def _lam_from_structure(lo: int, is_prime: np.ndarray, pp: np.ndarray) -> np.ndarray:
    lam = np.zeros(len(is_prime), dtype=np.float64)
    idx = np.flatnonzero(is_prime)
    lam[idx] = np.log((idx + lo).astype(np.float64))
    if len(pp):
        lam[pp[:, 0] - lo] = np.log(pp[:, 1].astype(np.float64))
    return lam


def _sieve_block(lo: int, hi: int, base: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Prime flags and proper prime-power records for [lo, hi), lo >= 0."""
    flags = np.ones(hi - lo, dtype=bool)
    for k in (0, 1):
        if lo <= k < hi:
            flags[k - lo] = False
    records = []
    for p in base.tolist():
        pp = p * p
        if pp >= hi:
            break
        start = max(pp, -(-lo // p) * p)
        if start < hi:
            flags[start - lo :: p] = False
        e = 2
        while pp < hi:
            if pp >= lo:
                records.append((pp, p, e))
            pp *= p
            e += 1
    records.sort()
    rows = np.array(records, dtype=np.int64).reshape(-1, 3)
    return flags, rows


def _check_range(lo: int, hi: int, max_hi: int, max_length: int) -> None:
    if lo >= hi:
        raise DomainError(f"empty sieve interval [{lo}, {hi})")
    if hi > max_hi:
        raise ResourceError(f"sieve bound {hi} exceeds configured maximum {max_hi}")
    if hi - lo > max_length:
        raise ResourceError(
            f"sieve interval of length {hi - lo} exceeds memory budget {max_length}"
        )


def _sieve(lo: int, hi: int, width: int) -> SieveSegment:
    base = primes_upto(math.isqrt(hi - 1))
    flag_parts = []
    row_parts = []
    for start in range(lo, hi, width):
        stop = min(start + width, hi)
        flags, rows = _sieve_block(start, stop, base)
        flag_parts.append(flags)
        row_parts.append(rows)
    is_prime = np.concatenate(flag_parts)
    pp = np.concatenate(row_parts) if row_parts else np.zeros((0, 3), np.int64)
    lam = _lam_from_structure(lo, is_prime, pp)
    return SieveSegment(lo, hi, lam, is_prime, pp)


def sieve_segment(
    lo: int,
    hi: int,
    *,
    width: int = DEFAULT_WIDTH,
    max_hi: int = MAX_HI,
    max_length: int = MAX_LENGTH,
    cache: SieveCache | None = None,
) -> SieveSegment:
    """Sieve [lo, hi) for primes and prime powers.

    The result does not depend on ``width``; it only bounds the working set
    of each inner block. When ``cache`` is given, a stored segment for the
    exact interval is reused (after checksum verification) or written.
    """
    lo, hi = int(lo), int(hi)
    if lo < 1:
        raise DomainError(f"sieve interval must start at lo >= 1, got {lo}")
    _check_range(lo, hi, max_hi, max_length)
    if width < 1:
        raise DomainError("width must be positive")
    if cache is not None:
        seg = cache.load(lo, hi)
        if seg is not None:
            return seg
    seg = _sieve(lo, hi, width)
    if cache is not None:
        cache.store(seg)
    return seg


def segment_from_structure(lo: int, hi: int, is_prime: np.ndarray, pp: np.ndarray) -> SieveSegment:
    """Rebuild a segment (including ``lam``) from its exact structure."""
    return SieveSegment(lo, hi, _lam_from_structure(lo, is_prime, pp), is_prime, pp)


_MEMO_SIZE = 2
_memo: dict[int, SieveSegment] = {}
_memo_lock = threading.Lock()


def _freeze(seg: SieveSegment) -> SieveSegment:
    seg.lam.flags.writeable = False
    seg.is_prime.flags.writeable = False
    return seg


def _remember(n: int, seg: SieveSegment) -> SieveSegment:
    with _memo_lock:
        _memo.pop(n, None)
        _memo[n] = seg
        while len(_memo) > _MEMO_SIZE:
            _memo.pop(next(iter(_memo)))
    return seg


def _tables(n: int) -> SieveSegment:
    with _memo_lock:
        seg = _memo.get(n)
    if seg is not None:
        return seg
    _check_range(0, n + 1, MAX_HI, MAX_LENGTH)
    return _remember(n, _freeze(_sieve(0, n + 1, DEFAULT_WIDTH)))


def preload_tables(n: int, cache: SieveCache) -> SieveSegment:
    """Fill the table memo for [0, n] from ``cache`` (segment [1, n+1)).

    The cached segment is sieved and stored on a miss. Values are identical
    to a fresh sieve; the cache only saves time.
    """
    n = int(n)
    seg = sieve_segment(1, n + 1, cache=cache)
    is_prime = np.concatenate([[False], seg.is_prime])
    full = segment_from_structure(0, n + 1, is_prime, seg.prime_powers)
    return _remember(n, _freeze(full))


def sieve_tables(n: int) -> SieveSegment:
    """Memoized read-only segment for [0, n], indexable directly by n."""
    return _tables(int(n))


def von_mangoldt_array(n: int) -> np.ndarray:
    """Read-only array ``L`` with ``L[k] = Lambda(k)`` for 0 <= k <= n."""
    return _tables(int(n)).lam


def prime_flags(n: int) -> np.ndarray:
    """Read-only boolean array of length n + 1 flagging primes."""
    return _tables(int(n)).is_prime
