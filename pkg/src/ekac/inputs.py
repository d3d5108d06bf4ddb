"""Input multisets, their sieve density models, and empirical remainders.

Two input families are built in: the integers 1..x, and shifted primes
p - a for primes p <= x. Each carries a multiplicative density h so that
(h(d)/d) * X approximates the number of elements divisible by d; the
remainder E_d is the exact discrepancy, measured by counting.

Other families (friable integers, progressions, ...) can be added by
supplying the same three ingredients: an element enumeration, a density
value h(p) per prime, and the scale X. Everything downstream consumes
only that interface.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Iterator, Union

import numpy as np

from .errors import CapabilityError, SizeGuardError
from .sieve import (
    FactorRecord,
    FactorStream,
    PrimeTable,
    distinct_prime_factors,
    factor_stream,
    prime_power_factorization,
)


@dataclass(frozen=True)
class AllIntegers:
    """The set {1, ..., x}."""

    x: int

    def __post_init__(self):
        if self.x < 1:
            raise ValueError(f"x must be positive, got {self.x}")


@dataclass(frozen=True)
class ShiftedPrimes:
    """The set {p - shift : p prime, shift < p <= x}."""

    x: int
    shift: int

    def __post_init__(self):
        if self.shift == 0:
            raise ValueError("shift must be nonzero")
        if self.x < 2:
            raise ValueError(f"x must be at least 2, got {self.x}")


InputSet = Union[AllIntegers, ShiftedPrimes]


def element_range(input_set: InputSet) -> tuple[int, int]:
    """Smallest interval [lo, hi] containing every element of the set."""
    if isinstance(input_set, AllIntegers):
        return 1, input_set.x
    return 1, input_set.x - input_set.shift


def element_values(input_set: InputSet, table: PrimeTable) -> np.ndarray:
    """All elements of the set, ascending, as an int64 array."""
    if isinstance(input_set, AllIntegers):
        return np.arange(1, input_set.x + 1, dtype=np.int64)
    if table.limit < input_set.x:
        raise CapabilityError(
            f"prime table limit {table.limit} < x = {input_set.x}"
        )
    ps = table.primes
    ps = ps[(ps > input_set.shift) & (ps <= input_set.x)]
    return ps - input_set.shift


@dataclass(frozen=True)
class DensityModel:
    """Multiplicative density h (values on primes) plus the scale X.

    ``shift`` is None for the h == 1 model of the full integer range, and
    the (nonzero) shift a for the shifted-prime model h(p) = p/(p-1) when
    p does not divide a, h(p) = 0 when it does.
    """

    name: str
    x_scale: float
    x_exact: Fraction | None  # exact X when rational, else None
    shift: int | None

    def h(self, p: int) -> Fraction:
        """Exact h(p) for a prime p."""
        if self.shift is None:
            return Fraction(1)
        if self.shift % p == 0:
            return Fraction(0)
        return Fraction(p, p - 1)

    def h_over(self, primes: np.ndarray) -> np.ndarray:
        """h(p) for an array of primes, as float64."""
        if self.shift is None:
            return np.ones(primes.size)
        pf = primes.astype(np.float64)
        vals = pf / (pf - 1.0)
        vals[self.shift % primes == 0] = 0.0
        return vals


def big_x(input_set: InputSet) -> float:
    """The scale X: x itself, or li(x) for shifted primes."""
    if isinstance(input_set, AllIntegers):
        return float(input_set.x)
    return log_integral(float(input_set.x))


def model_for(input_set: InputSet) -> DensityModel:
    if isinstance(input_set, AllIntegers):
        return DensityModel(
            name="unit",
            x_scale=float(input_set.x),
            x_exact=Fraction(input_set.x),
            shift=None,
        )
    return DensityModel(
        name=f"shifted({input_set.shift})",
        x_scale=big_x(input_set),
        x_exact=None,
        shift=input_set.shift,
    )


def unit_model(x: int = 0) -> DensityModel:
    """The h == 1 model, usable standalone in identity checks."""
    return DensityModel(
        name="unit", x_scale=float(x), x_exact=Fraction(x), shift=None
    )


def shifted_model(shift: int, x: int = 0) -> DensityModel:
    """The shifted-prime density h(p) = p/(p-1) off divisors of the shift."""
    if shift == 0:
        raise ValueError("shift must be nonzero")
    x_scale = log_integral(float(x)) if x >= 2 else 0.0
    return DensityModel(
        name=f"shifted({shift})", x_scale=x_scale, x_exact=None, shift=shift
    )


def density_h(model: DensityModel, d: int) -> Fraction:
    """h(d) for squarefree d: the product of h(p) over p | d."""
    if d < 1:
        raise ValueError(f"d must be positive, got {d}")
    out = Fraction(1)
    for p, alpha in prime_power_factorization(d):
        if alpha > 1:
            raise ValueError(f"d = {d} is not squarefree (p = {p})")
        out *= model.h(p)
    return out


def enumerate_records(input_set: InputSet, table: PrimeTable) -> FactorStream:
    """Stream every element of the set with its distinct prime factors."""
    if isinstance(input_set, AllIntegers):
        return factor_stream(1, input_set.x)
    if table.limit < input_set.x:
        raise CapabilityError(
            f"prime table limit {table.limit} < x = {input_set.x}"
        )
    shift, x = input_set.shift, input_set.x

    def gen() -> Iterator[FactorRecord]:
        for p in table.primes.tolist():
            if p <= shift:
                continue
            if p > x:
                break
            a = p - shift
            yield FactorRecord(a, tuple(distinct_prime_factors(a, table)))

    return FactorStream(
        source=f"primes <= {x} shifted by {shift}", _factory=gen
    )


@dataclass(frozen=True)
class Remainder:
    """E_d with count(A_d) = (h(d)/d) X + E_d, measured exactly."""

    d: int
    value: Fraction | float


def count_multiples(
    input_set: InputSet, d: int, table: PrimeTable | None = None
) -> int:
    """Exact number of elements divisible by d."""
    if isinstance(input_set, AllIntegers):
        return input_set.x // d
    if table is None or table.limit < input_set.x:
        raise CapabilityError("shifted-prime counting needs a table up to x")
    ps = table.primes
    ps = ps[(ps > input_set.shift) & (ps <= input_set.x)]
    return int(np.count_nonzero(ps % d == input_set.shift % d))


def empirical_remainder(
    input_set: InputSet,
    model: DensityModel,
    d: int,
    table: PrimeTable | None = None,
) -> Remainder:
    """E_d = (exact count of elements divisible by d) - (h(d)/d) X.

    Exact rational for the integer range (X = x is rational); a float for
    shifted primes (X = li(x)).
    """
    hd = density_h(model, d)  # also validates squarefreeness
    count = count_multiples(input_set, d, table)
    if model.x_exact is not None:
        return Remainder(d, Fraction(count) - hd / d * model.x_exact)
    return Remainder(d, float(count) - float(hd) / d * model.x_scale)


# -- logarithmic integral -----------------------------------------------------


def _simpson(fa: float, fm: float, fb: float, h: float) -> float:
    return h / 6.0 * (fa + 4.0 * fm + fb)


def _adaptive(f, a, b, fa, fm, fb, whole, tol, depth):
    m = 0.5 * (a + b)
    lm, rm = 0.5 * (a + m), 0.5 * (m + b)
    flm, frm = f(lm), f(rm)
    left = _simpson(fa, flm, fm, m - a)
    right = _simpson(fm, frm, fb, b - m)
    delta = left + right - whole
    if depth <= 0 or abs(delta) <= 15.0 * tol:
        return left + right + delta / 15.0
    return _adaptive(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) + _adaptive(
        f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1
    )


def log_integral(x: float, tol: float = 1e-9) -> float:
    """The offset logarithmic integral of x (integral from 2 of dt/log t).

    Adaptive Simpson quadrature; ``tol`` is the absolute error target
    (meaningful while eps * li(x) stays below it, i.e. x up to ~1e8).
    """
    if x < 2.0:
        raise ValueError(f"log_integral needs x >= 2, got {x}")
    if x == 2.0:
        return 0.0

    def f(t: float) -> float:
        return 1.0 / math.log(t)

    a, b = 2.0, float(x)
    fa, fb = f(a), f(b)
    m = 0.5 * (a + b)
    fm = f(m)
    whole = _simpson(fa, fm, fb, b - a)
    return _adaptive(f, a, b, fa, fm, fb, whole, tol, 60)


# -- remainder-sum diagnostic -------------------------------------------------


def remainder_sum_ratio(
    input_set: InputSet,
    model: DensityModel,
    window_primes: list[int],
    k: int,
    frak_k: float,
    table: PrimeTable | None = None,
    max_terms: int = 200_000,
) -> float:
    """Measured ratio mu^P(1)^k * sum_{d in D_k(P)} |E_d| / (X * K^(k/2-1)).

    Reported as a diagnostic of how the remainder-sum hypothesis behaves at
    finite scale; the asymptotic claim itself is not decidable here.
    """
    n = len(window_primes)
    total = sum(math.comb(n, i) for i in range(0, k + 1))
    if total > max_terms:
        raise SizeGuardError(f"D_k would hold {total} > {max_terms} elements")
    mu1 = math.fsum(float(model.h(p)) / p for p in window_primes)
    acc = 0.0
    for size in range(0, k + 1):
        for combo in combinations(window_primes, size):
            d = math.prod(combo)
            acc += abs(float(empirical_remainder(input_set, model, d, table).value))
    x_scale = model.x_scale if model.x_scale > 0 else big_x(input_set)
    return (mu1**k) * acc / (x_scale * frak_k ** (k / 2.0 - 1.0))
