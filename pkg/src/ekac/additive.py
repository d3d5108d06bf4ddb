"""Strongly additive functions defined by their values on primes.

A strongly additive g satisfies g(mn) = g(m) + g(n) for coprime m, n and
g(p^a) = g(p), so it is determined by p -> g(p). Values are nonnegative and
bounded by a constant G supplied at construction; both constraints are
enforced on every queried prime.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable

import numpy as np

from .errors import CapabilityError
from .inputs import DensityModel
from .sieve import PrimeTable

Value = Fraction | int | float


@dataclass(frozen=True)
class PrimeWindow:
    """The finite prime set P(z): all table primes up to the threshold z."""

    z: float
    primes: np.ndarray  # ascending int64

    def __len__(self) -> int:
        return int(self.primes.size)

    def iter_primes(self) -> Iterable[int]:
        return (int(p) for p in self.primes)


def window_up_to(table: PrimeTable, z: float) -> PrimeWindow:
    if z > table.limit:
        raise CapabilityError(
            f"window z = {z} exceeds table limit {table.limit}"
        )
    return PrimeWindow(z=float(z), primes=table.primes[table.primes <= z])


def window_from_primes(primes: Iterable[int]) -> PrimeWindow:
    """Window over an explicit small prime set (identity checks)."""
    arr = np.asarray(sorted(set(int(p) for p in primes)), dtype=np.int64)
    z = float(arr[-1]) if arr.size else 0.0
    return PrimeWindow(z=z, primes=arr)


class StronglyAdditive:
    """g given by a per-prime callback, memoized, with 0 <= g(p) <= bound.

    The memo table uses insert-once writes under a lock so concurrent
    readers always observe a consistent value for each prime.
    """

    def __init__(
        self,
        name: str,
        fn: Callable[[int], Value],
        bound: float,
        vectorized: Callable[[np.ndarray], np.ndarray] | None = None,
    ):
        if bound < 0:
            raise ValueError(f"bound must be nonnegative, got {bound}")
        self.name = name
        self.bound = bound
        self._fn = fn
        self._vectorized = vectorized
        self._memo: dict[int, Value] = {}
        self._lock = threading.Lock()

    def __repr__(self) -> str:
        return f"StronglyAdditive({self.name!r}, bound={self.bound})"

    def at(self, p: int) -> Value:
        """g(p) for a prime p."""
        v = self._memo.get(p)
        if v is None:
            v = self._fn(p)
            if v < 0:
                raise ValueError(f"{self.name}({p}) = {v} is negative")
            if v > self.bound:
                raise ValueError(
                    f"{self.name}({p}) = {v} exceeds bound {self.bound}"
                )
            with self._lock:
                v = self._memo.setdefault(p, v)
        return v

    def over(self, primes: np.ndarray) -> np.ndarray:
        """g(p) for an array of primes, as float64."""
        if self._vectorized is not None:
            vals = np.asarray(self._vectorized(primes), dtype=np.float64)
            if vals.size and (vals.min() < 0 or vals.max() > self.bound):
                raise ValueError(f"{self.name} violates [0, {self.bound}]")
            return vals
        return np.array([float(self.at(int(p))) for p in primes])


def builtin_omega() -> StronglyAdditive:
    """The distinct-prime-divisor count: g(p) = 1 for every prime."""
    return StronglyAdditive(
        "omega",
        lambda p: 1,
        bound=1,
        vectorized=lambda ps: np.ones(ps.size),
    )


def builtin_omega_class(
    predicate: Callable[[int], bool], label: str
) -> StronglyAdditive:
    """Distinct prime divisors restricted to a class: g(p) = [predicate(p)]."""
    return StronglyAdditive(
        label, lambda p: 1 if predicate(p) else 0, bound=1
    )


def omega_residue_class(modulus: int, residue: int) -> StronglyAdditive:
    """Counts prime divisors p with p = residue (mod modulus)."""
    if modulus < 2:
        raise ValueError(f"modulus must be >= 2, got {modulus}")
    r = residue % modulus
    return StronglyAdditive(
        f"omega[{r} mod {modulus}]",
        lambda p: 1 if p % modulus == r else 0,
        bound=1,
        vectorized=lambda ps: (ps % modulus == r).astype(np.float64),
    )


def eval_full(g: StronglyAdditive, factors: Iterable[int]):
    """g(a) from the distinct prime factors of a."""
    return sum((g.at(p) for p in factors), start=0)


def eval_truncated(
    g: StronglyAdditive, factors: Iterable[int], window: PrimeWindow
):
    """g^P(a): the sum of g(p) over prime factors p of a with p <= z."""
    return sum((g.at(p) for p in factors if p <= window.z), start=0)


def centered_value(
    g: StronglyAdditive,
    factors: Iterable[int],
    window: PrimeWindow,
    model: DensityModel,
    mean: float | None = None,
) -> float:
    """The centered truncation g^P(a) - mu^P(g)."""
    if mean is None:
        from .stats import mean_mu

        mean = mean_mu(g, window, model)
    return float(eval_truncated(g, factors, window)) - mean


def centered_value_by_weights(
    g: StronglyAdditive,
    factors: Iterable[int],
    window: PrimeWindow,
    model: DensityModel,
) -> Fraction:
    """Same centered value via the per-prime weights, exactly.

    For each window prime p the weight is 1 - h(p)/p when p divides a and
    -h(p)/p otherwise; the centered value is sum of g(p) * weight.
    """
    fset = set(int(p) for p in factors)
    total = Fraction(0)
    for p in window.iter_primes():
        hp = model.h(p) / p
        w = (1 - hp) if p in fset else -hp
        total += Fraction(g.at(p)) * w
    return total


def range_truncated_values(
    gs: list[StronglyAdditive],
    window: PrimeWindow,
    lo: int,
    hi: int,
    inner_z: float | None = None,
) -> list[np.ndarray] | tuple[list[np.ndarray], list[np.ndarray]]:
    """g^P(n) for every n in [lo, hi], for each g, by sieve marking.

    With ``inner_z`` also returns the profiles truncated at the inner
    threshold, filled in the same pass (the two-window experiment case).
    """
    if lo < 1 or lo > hi:
        raise ValueError(f"bad range [{lo}, {hi}]")
    length = hi - lo + 1
    outer = [np.zeros(length) for _ in gs]
    inner = [np.zeros(length) for _ in gs] if inner_z is not None else None
    gvals = [g.over(window.primes) for g in gs]
    plist = window.primes.tolist()
    for j in range(len(gs)):
        vals = gvals[j]
        out = outer[j]
        inn = inner[j] if inner is not None else None
        for i, p in enumerate(plist):
            gv = vals[i]
            if gv == 0.0:
                continue
            start = ((lo + p - 1) // p) * p
            if start > hi:
                continue
            sl = slice(start - lo, length, p)
            out[sl] += gv
            if inn is not None and p <= inner_z:
                inn[sl] += gv
    if inner is not None:
        return outer, inner
    return outer
