"""Sparse multivariate polynomials with nonnegative coefficients.

Exponent vectors are the keys, coefficients the values. Coefficients stay
in whatever exact type they were given (int or Fraction preferred), so the
difference-power expansion below can be checked in exact arithmetic.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Mapping, Sequence

import numpy as np

Coef = Fraction | int | float


@dataclass(frozen=True)
class PolyQ:
    """Polynomial in ``nvars`` variables as {exponent vector: coefficient}."""

    nvars: int
    terms: Mapping[tuple[int, ...], Coef]

    @property
    def degree(self) -> int:
        return max((sum(e) for e in self.terms), default=0)

    def eval(self, point: Sequence) -> Coef:
        """Value at a point (scalars or numpy arrays per coordinate)."""
        if len(point) != self.nvars:
            raise ValueError(
                f"point has {len(point)} coordinates, need {self.nvars}"
            )
        total = 0
        for exps, c in self.terms.items():
            term = c
            for x, e in zip(point, exps):
                if e:
                    term = term * x**e
            total = total + term
        return total

    def partial(self, var: int) -> "PolyQ":
        """Formal partial derivative in variable ``var`` (0-based)."""
        if not 0 <= var < self.nvars:
            raise IndexError(f"variable {var} out of range 0..{self.nvars - 1}")
        out: dict[tuple[int, ...], Coef] = {}
        for exps, c in self.terms.items():
            e = exps[var]
            if e == 0:
                continue
            key = exps[:var] + (e - 1,) + exps[var + 1 :]
            out[key] = out.get(key, 0) + c * e
        return PolyQ(self.nvars, out)


def make_poly(nvars: int, terms: Mapping[tuple[int, ...], Coef]) -> PolyQ:
    """Validated constructor: nonnegative coefficients, degree >= 1."""
    if nvars < 1:
        raise ValueError(f"need at least one variable, got {nvars}")
    clean: dict[tuple[int, ...], Coef] = {}
    for exps, c in terms.items():
        exps = tuple(int(e) for e in exps)
        if len(exps) != nvars or any(e < 0 for e in exps):
            raise ValueError(f"bad exponent vector {exps}")
        if c < 0:
            raise ValueError(f"negative coefficient {c} at {exps}")
        if c != 0:
            clean[exps] = clean.get(exps, 0) + c
    q = PolyQ(nvars, clean)
    if q.degree < 1:
        raise ValueError("polynomial must have degree at least 1")
    return q


_TOKEN = re.compile(r"\s*([Tt](\d*)(\^(\d+))?|\d+(\.\d+)?(/\d+)?)\s*")


def parse_poly(text: str, nvars: int | None = None) -> PolyQ:
    """Parse a literal like "T1^2*T2 + 3*T1" (also "T^3" for one variable).

    Grammar: terms joined by '+', factors joined by '*'; a factor is either
    a nonnegative number (integer, decimal, or fraction like 1/2) or a
    variable T or Tk with an optional ^exponent. No other operators.
    """
    if not text.strip():
        raise ValueError("empty polynomial literal")
    raw_terms: list[tuple[Coef, dict[int, int]]] = []
    max_var = 0
    for chunk in text.split("+"):
        chunk = chunk.strip()
        if not chunk:
            raise ValueError(f"empty term in polynomial literal {text!r}")
        coef: Coef = 1
        exps: dict[int, int] = {}
        for factor in chunk.split("*"):
            factor = factor.strip()
            m = _TOKEN.fullmatch(factor)
            if m is None:
                raise ValueError(
                    f"cannot parse factor {factor!r}; only nonnegative "
                    "coefficients, variables T1..Tn, '+', '*', '^' allowed"
                )
            if m.group(1)[0] in "Tt":
                idx = int(m.group(2)) if m.group(2) else 1
                if idx < 1:
                    raise ValueError(f"variable index must be >= 1 in {factor!r}")
                e = int(m.group(4)) if m.group(4) else 1
                exps[idx - 1] = exps.get(idx - 1, 0) + e
                max_var = max(max_var, idx)
            else:
                coef = coef * Fraction(m.group(1).strip())
        raw_terms.append((coef, exps))
    n = nvars if nvars is not None else max_var
    if n < 1:
        raise ValueError("polynomial has no variables")
    if max_var > n:
        raise ValueError(f"literal uses T{max_var} but nvars = {n}")
    terms: dict[tuple[int, ...], Coef] = {}
    for coef, exps in raw_terms:
        key = tuple(exps.get(i, 0) for i in range(n))
        terms[key] = terms.get(key, 0) + coef
    return make_poly(n, terms)


def poly_literal(q: PolyQ) -> str:
    """Canonical literal for q; parse_poly round-trips it."""
    parts = []
    for exps in sorted(q.terms, key=lambda e: (-sum(e), e)):
        c = q.terms[exps]
        factors = []
        if c != 1 or not any(exps):
            factors.append(str(Fraction(c) if not isinstance(c, float) else c))
        for i, e in enumerate(exps):
            if e == 1:
                factors.append(f"T{i + 1}")
            elif e > 1:
                factors.append(f"T{i + 1}^{e}")
        parts.append("*".join(factors))
    return " + ".join(parts)


# -- difference-power expansion -----------------------------------------------


@dataclass(frozen=True)
class RmMonomial:
    """One monomial r * prod x_v * prod y_w of the expansion."""

    coeff: Coef
    x_vars: tuple[int, ...]  # sorted variable indices; len = x-degree
    y_vars: tuple[int, ...]


@dataclass(frozen=True)
class RmExpansion:
    """(Q(x+y) - Q(y))^m fully expanded and collected.

    Structural facts used downstream: every monomial has x-degree at least
    m, total degree at most degree(Q) * m, and the minimum x-degree m is
    attained.
    """

    m: int
    nvars: int
    degree_bound: int
    monomials: tuple[RmMonomial, ...]

    def min_x_degree(self) -> int:
        return min(len(mon.x_vars) for mon in self.monomials)

    def evaluate(self, xs: Sequence, ys: Sequence) -> Coef:
        total = 0
        for mon in self.monomials:
            term = mon.coeff
            for i in mon.x_vars:
                term = term * xs[i]
            for j in mon.y_vars:
                term = term * ys[j]
            total = total + term
        return total


def _dict_mul(a: dict, b: dict, n: int) -> dict:
    out: dict[tuple[tuple[int, ...], tuple[int, ...]], Coef] = {}
    for (xa, ya), ca in a.items():
        for (xb, yb), cb in b.items():
            key = (
                tuple(xa[i] + xb[i] for i in range(n)),
                tuple(ya[i] + yb[i] for i in range(n)),
            )
            out[key] = out.get(key, 0) + ca * cb
    return out


def expand_difference(q: PolyQ) -> dict:
    """Q(x+y) - Q(y) as {(x-exponents, y-exponents): coefficient}."""
    n = q.nvars
    out: dict[tuple[tuple[int, ...], tuple[int, ...]], Coef] = {}
    for exps, c in q.terms.items():
        splits_per_var = []
        for e in exps:
            splits_per_var.append(
                [(k, e - k, math.comb(e, k)) for k in range(e + 1)]
            )
        for combo in product(*splits_per_var):
            xexp = tuple(s[0] for s in combo)
            yexp = tuple(s[1] for s in combo)
            mult = 1
            for s in combo:
                mult *= s[2]
            key = (xexp, yexp)
            out[key] = out.get(key, 0) + c * mult
    for exps, c in q.terms.items():
        key = ((0,) * n, exps)
        out[key] = out.get(key, 0) - c
    return {k: v for k, v in out.items() if v != 0}


def expand_R_m(q: PolyQ, m: int) -> RmExpansion:
    """Canonical expansion of (Q(x+y) - Q(y))^m.

    Substitutes T_i <- x_i + y_i, subtracts Q(y), raises to the m-th power,
    and collects like monomials; monomials are ordered lexicographically on
    their sorted variable-index multisets.
    """
    if m < 1:
        raise ValueError(f"moment index must be positive, got {m}")
    n = q.nvars
    diff = expand_difference(q)
    power = {((0,) * n, (0,) * n): 1}
    for _ in range(m):
        power = _dict_mul(power, diff, n)
    monomials = []
    for (xexp, yexp), c in power.items():
        xv = tuple(i for i in range(n) for _ in range(xexp[i]))
        yv = tuple(i for i in range(n) for _ in range(yexp[i]))
        monomials.append(RmMonomial(c, xv, yv))
    monomials.sort(key=lambda mon: (len(mon.x_vars), mon.x_vars, mon.y_vars))
    exp = RmExpansion(
        m=m,
        nvars=n,
        degree_bound=q.degree * m,
        monomials=tuple(monomials),
    )
    bad = [
        mon
        for mon in exp.monomials
        if len(mon.x_vars) < m
        or len(mon.x_vars) + len(mon.y_vars) > exp.degree_bound
    ]
    if bad or exp.min_x_degree() != m:
        raise AssertionError("expansion violates its structural bounds")
    return exp


def eval_terms_on_arrays(q: PolyQ, coords: list[np.ndarray]) -> np.ndarray:
    """Q evaluated coordinatewise on equal-length float arrays."""
    if len(coords) != q.nvars:
        raise ValueError(f"need {q.nvars} coordinate arrays")
    total = np.zeros_like(coords[0], dtype=np.float64)
    for exps, c in q.terms.items():
        term = np.full_like(total, float(c))
        for arr, e in zip(coords, exps):
            if e == 1:
                term *= arr
            elif e > 1:
                term *= arr**e
        total += term
    return total
