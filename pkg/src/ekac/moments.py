"""Streaming power sums of the centered values Q(g^P(a)) - A_Q.

Accumulators are single-writer and mergeable: partitions of the input each
fill their own accumulator and the results combine associatively, with
Kahan compensation carried through both element adds and merges.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .additive import PrimeWindow, StronglyAdditive, eval_truncated
from .errors import ZeroVarianceError
from .poly import PolyQ
from .sieve import FactorRecord
from .stats import StatBundle


def gaussian_moment_C(m: int) -> int:
    """m-th moment of the standard normal: m!/(2^(m/2) (m/2)!) for even m."""
    if m < 0:
        raise ValueError(f"moment index must be nonnegative, got {m}")
    if m % 2 == 1:
        return 0
    half = m // 2
    return math.factorial(m) // (2**half * math.factorial(half))


def _kahan_add(total: float, comp: float, value: float) -> tuple[float, float]:
    y = value - comp
    t = total + y
    return t, (t - total) - y


class MomentAccumulator:
    """Power sums sum_a (Q(g^P(a)) - A_Q)^m for m = 0..m_max.

    ``config_key`` identifies the (Q, functions, window, A_Q) configuration;
    merging accumulators with different keys is refused.
    """

    __slots__ = ("m_max", "config_key", "count", "_sums", "_comps")

    def __init__(self, m_max: int, config_key: tuple = ()):
        if m_max < 2 or m_max % 2 != 0:
            raise ValueError(f"m_max must be even and >= 2, got {m_max}")
        self.m_max = m_max
        self.config_key = config_key
        self.count = 0
        self._sums = [0.0] * (m_max + 1)
        self._comps = [0.0] * (m_max + 1)

    @property
    def power_sums(self) -> list[float]:
        out = list(self._sums)
        out[0] = float(self.count)
        return out

    def add_centered(self, c: float) -> None:
        """Add one centered value: power sums update for every m <= m_max."""
        self.count += 1
        cur = 1.0
        for m in range(1, self.m_max + 1):
            cur *= c  # repeated multiply; no pow in the hot loop
            self._sums[m], self._comps[m] = _kahan_add(
                self._sums[m], self._comps[m], cur
            )

    def add_centered_array(self, values: np.ndarray) -> None:
        """Add a whole partition of centered values at once."""
        if values.size == 0:
            return
        self.count += int(values.size)
        cur = values.astype(np.float64, copy=True)
        for m in range(1, self.m_max + 1):
            if m > 1:
                cur *= values
            self._sums[m], self._comps[m] = _kahan_add(
                self._sums[m], self._comps[m], float(np.sum(cur))
            )

    def add_record(
        self,
        record: FactorRecord,
        q: PolyQ,
        gs: list[StronglyAdditive],
        window: PrimeWindow,
        a_q_value: float,
    ) -> None:
        """Contract-level per-element path: truncate, evaluate Q, center."""
        coords = [float(eval_truncated(g, record.primes, window)) for g in gs]
        self.add_centered(float(q.eval(coords)) - a_q_value)


def merge(a: MomentAccumulator, b: MomentAccumulator) -> MomentAccumulator:
    """Componentwise combination; preserves compensation carries."""
    if a.m_max != b.m_max:
        raise ValueError(f"m_max mismatch: {a.m_max} != {b.m_max}")
    if a.config_key != b.config_key:
        raise ValueError("accumulators come from different configurations")
    out = MomentAccumulator(a.m_max, a.config_key)
    out.count = a.count + b.count
    for m in range(1, a.m_max + 1):
        s, c = _kahan_add(a._sums[m], a._comps[m], b._sums[m])
        s, c2 = _kahan_add(s, c, b._comps[m])
        out._sums[m], out._comps[m] = s, c2
    return out


@dataclass(frozen=True)
class MomentRow:
    m: int
    value: float  # M_m
    gaussian: float  # C_m
    ratio: float  # M_m / (#A * B_Q^m)
    predicted: float  # C_m for even m, 0 for odd


@dataclass(frozen=True)
class MomentReport:
    rows: tuple[MomentRow, ...]

    def to_csv_text(self, provenance: dict | None = None) -> str:
        lines = []
        if provenance:
            meta = " ".join(f"{k}={v}" for k, v in sorted(provenance.items()))
            lines.append(f"# {meta}")
        lines.append("m,M_m,C_m,ratio,predicted")
        for r in self.rows:
            lines.append(
                f"{r.m},{r.value:.17g},{r.gaussian:.17g},"
                f"{r.ratio:.17g},{r.predicted:.17g}"
            )
        return "\n".join(lines) + "\n"


def report(acc: MomentAccumulator, bundle: StatBundle) -> MomentReport:
    """Ratios M_m / (#A * B_Q^m) against the normal moments."""
    if bundle.b_q <= 0.0:
        raise ZeroVarianceError("B_Q vanishes; normalized ratios undefined")
    if acc.count == 0:
        raise ValueError("empty accumulator")
    sums = acc.power_sums
    rows = []
    for m in range(0, acc.m_max + 1):
        cm = gaussian_moment_C(m)
        denom = acc.count * bundle.b_q**m
        rows.append(
            MomentRow(
                m=m,
                value=sums[m],
                gaussian=float(cm),
                ratio=sums[m] / denom,
                predicted=float(cm),
            )
        )
    return MomentReport(tuple(rows))
