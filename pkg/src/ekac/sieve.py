"""Prime enumeration and streamed distinct-prime factorization.

The streaming factorizer works segment by segment: within a segment every
sieving prime p <= sqrt(hi) marks its multiples (collecting p into the
factor list and dividing it out), after which any entry left greater than 1
is a prime cofactor larger than sqrt(hi). Exponents are discarded: callers
downstream only ever need the set of distinct primes dividing each value.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterator, NamedTuple

import numpy as np

from .errors import CapabilityError, EmptyRangeError

MAX_INPUT = 2**63 - 1  # 64-bit integer width throughout
DEFAULT_SEGMENT_LEN = 1 << 18  # keeps per-segment arrays L2-resident
SPF_CACHE_LIMIT = 1 << 24  # full SPF arrays only below this (int32, ~64 MB)


class FactorRecord(NamedTuple):
    value: int
    primes: tuple[int, ...]  # distinct prime divisors, ascending


class PrimeTable:
    """All primes up to ``limit``, ascending. Immutable after construction."""

    __slots__ = ("limit", "primes", "_spf")

    def __init__(self, limit: int, primes: np.ndarray):
        self.limit = int(limit)
        self.primes = primes
        self._spf: np.ndarray | None = None

    def __len__(self) -> int:
        return int(self.primes.size)

    def __repr__(self) -> str:
        return f"PrimeTable(limit={self.limit}, count={len(self)})"

    def spf_array(self) -> np.ndarray:
        """Smallest-prime-factor lookup for [0, limit], built lazily.

        spf[n] is the smallest prime dividing n (n itself when n is prime);
        spf[1] == 1 and spf[0] == 0 by convention.
        """
        if self._spf is None:
            if self.limit > SPF_CACHE_LIMIT:
                raise CapabilityError(
                    f"SPF array for limit {self.limit} exceeds cache bound"
                )
            spf = np.zeros(self.limit + 1, dtype=np.int32)
            for p in self.primes[self.primes <= math.isqrt(self.limit)].tolist():
                view = spf[p * p :: p]
                view[view == 0] = p
            unmarked = spf == 0
            spf[unmarked] = np.arange(self.limit + 1, dtype=np.int32)[unmarked]
            self._spf = spf
        return self._spf


def primes_up_to(limit: int) -> PrimeTable:
    """Sieve of Eratosthenes over [2, limit]."""
    if limit < 2:
        raise EmptyRangeError(f"no primes below 2 (limit={limit})")
    if limit > MAX_INPUT:
        raise ValueError(f"limit {limit} exceeds 64-bit range")
    flags = np.ones(limit + 1, dtype=bool)
    flags[:2] = False
    for p in range(2, math.isqrt(limit) + 1):
        if flags[p]:
            flags[p * p :: p] = False
    return PrimeTable(limit, np.nonzero(flags)[0].astype(np.int64))


@dataclass(frozen=True)
class SpfSegment:
    """Smallest-prime-factor entries for values [base, base + len(spf))."""

    base: int
    spf: np.ndarray


def spf_segment(base: int, length: int, sieve_primes: list[int]) -> SpfSegment:
    """SPF entries for one segment; ``sieve_primes`` must cover sqrt(hi)."""
    hi = base + length - 1
    spf = np.zeros(length, dtype=np.int64)
    for p in sieve_primes:
        if p * p > hi:
            break
        start = max((base + p - 1) // p, 2) * p
        if start > hi:
            continue
        view = spf[start - base :: p]
        view[view == 0] = p
    unmarked = spf == 0
    spf[unmarked] = np.arange(base, base + length, dtype=np.int64)[unmarked]
    return SpfSegment(base, spf)


def _segment_factor_lists(
    base: int, length: int, sieve_primes: list[int]
) -> list[list[int]]:
    """Distinct prime factors for every value in [base, base + length)."""
    hi = base + length - 1
    rem = np.arange(base, base + length, dtype=np.int64)
    lists: list[list[int]] = [[] for _ in range(length)]
    for p in sieve_primes:
        if p * p > hi:
            break
        start = max((base + p - 1) // p, 2) * p
        if start > hi:
            continue
        idx = np.arange(start - base, length, p, dtype=np.intp)
        for i in idx.tolist():
            lists[i].append(p)
        rem[idx] //= p
        again = idx[rem[idx] % p == 0]
        while again.size:
            rem[again] //= p
            again = again[rem[again] % p == 0]
    for i in np.nonzero(rem > 1)[0].tolist():
        lists[i].append(int(rem[i]))
    return lists


@dataclass(frozen=True)
class FactorStream:
    """Re-iterable stream of (value, distinct primes) records."""

    source: str
    _factory: Callable[[], Iterator[FactorRecord]]

    def __iter__(self) -> Iterator[FactorRecord]:
        return self._factory()


def factor_stream(
    lo: int, hi: int, segment_len: int = DEFAULT_SEGMENT_LEN
) -> FactorStream:
    """Stream (a, distinct prime factors of a) for every a in [lo, hi]."""
    if lo > hi:
        raise EmptyRangeError(f"empty range [{lo}, {hi}]")
    if lo < 1:
        raise ValueError(f"range must start at 1 or above, got {lo}")
    if segment_len < 1:
        raise ValueError(f"segment_len must be positive, got {segment_len}")
    if hi > MAX_INPUT:
        raise ValueError(f"hi {hi} exceeds 64-bit range")
    root = math.isqrt(hi)
    sieve_primes = primes_up_to(root).primes.tolist() if root >= 2 else []

    def gen() -> Iterator[FactorRecord]:
        for base in range(lo, hi + 1, segment_len):
            length = min(segment_len, hi - base + 1)
            lists = _segment_factor_lists(base, length, sieve_primes)
            for i in range(length):
                yield FactorRecord(base + i, tuple(lists[i]))

    return FactorStream(source=f"integers [{lo}, {hi}]", _factory=gen)


def prime_power_factorization(n: int) -> list[tuple[int, int]]:
    """(prime, exponent) pairs of n by plain trial division, ascending.

    Meant for the small operands used in exact identity checks; cost grows
    with sqrt of the largest prime factor.
    """
    if n < 1:
        raise ValueError(f"n must be positive, got {n}")
    out = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            a = 0
            while n % d == 0:
                n //= d
                a += 1
            out.append((d, a))
        d += 1 if d == 2 else 2
    if n > 1:
        out.append((n, 1))
    return out


def distinct_prime_factors(n: int, table: PrimeTable) -> list[int]:
    """Exact set of primes dividing n, ascending.

    Uses the table's SPF lookup when n is inside it, otherwise divides by
    table primes up to sqrt(n) with at most one residual prime cofactor.
    """
    if n < 1:
        raise ValueError(f"n must be positive, got {n}")
    if n > MAX_INPUT:
        raise ValueError(f"n {n} exceeds 64-bit range")
    if n == 1:
        return []
    if n <= table.limit and table.limit <= SPF_CACHE_LIMIT:
        spf = table.spf_array()
        out = []
        while n > 1:
            p = int(spf[n])
            out.append(p)
            while n % p == 0:
                n //= p
        return out
    if table.limit < n and table.limit * table.limit < n:
        raise CapabilityError(
            f"prime table (limit {table.limit}) cannot factor {n}"
        )
    out = []
    root = math.isqrt(n)
    for p in table.primes.tolist():
        if p > root:
            break
        if n % p == 0:
            out.append(p)
            while n % p == 0:
                n //= p
            root = math.isqrt(n)
    if n > 1:
        out.append(n)
    return out
