"""Empirical distribution of normalized values against the normal CDF.

Normalization here follows the law's final form: full (untruncated)
function values, centered by A_Q and scaled by B_Q computed over the
window of primes up to x.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr

from .additive import StronglyAdditive, range_truncated_values, window_up_to
from .errors import CapabilityError, ZeroVarianceError
from .inputs import InputSet, element_range, element_values
from .poly import PolyQ, eval_terms_on_arrays
from .sieve import PrimeTable
from .stats import StatBundle

HIST_BINS = 101
HIST_LO, HIST_HI = -5.0, 5.0
EXACT_ECDF_LIMIT = 10_000_000
_SKETCH_EDGES = np.linspace(-10.0, 10.0, 40_001)


def phi(u: float) -> float:
    """Standard normal CDF, absolute error well under 1e-12."""
    return 0.5 * math.erfc(-u / math.sqrt(2.0))


def phi_array(u: np.ndarray) -> np.ndarray:
    return ndtr(u)


@dataclass(frozen=True)
class Ecdf:
    """Sorted sample defining an empirical CDF."""

    values: np.ndarray
    n: int


def make_ecdf(values: np.ndarray) -> Ecdf:
    arr = np.sort(np.asarray(values, dtype=np.float64))
    if arr.size < 1:
        raise ValueError("empirical CDF needs at least one value")
    return Ecdf(values=arr, n=int(arr.size))


def ks_distance(ecdf: Ecdf) -> float:
    """sup-norm discrepancy against the normal CDF, over all jump points."""
    n = ecdf.n
    cdf = phi_array(ecdf.values)
    hi = np.arange(1, n + 1) / n - cdf
    lo = cdf - np.arange(0, n) / n
    return float(max(hi.max(), lo.max()))


def histogram(values: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Equal-width bins on [-5, 5]; outliers are clipped into the end bins."""
    edges = np.linspace(HIST_LO, HIST_HI, HIST_BINS + 1)
    clipped = np.clip(values, HIST_LO, np.nextafter(HIST_HI, -np.inf))
    counts, _ = np.histogram(clipped, bins=edges)
    return edges, counts


@dataclass(frozen=True)
class FitReport:
    """KS distance, histogram, and sample moments of normalized values.

    ``ks_floor`` is (largest atom mass)/2, the hard lower bound for the
    sup-distance between this sample's ECDF and any continuous CDF;
    ``ks_mid`` applies the mid-distribution correction for atoms
    (F(v) - mass(v)/2 against the normal CDF). Both are diagnostics for
    integer-valued inputs, where plain KS saturates at the atom floor.
    """

    ks: float
    hist_edges: np.ndarray
    hist_counts: np.ndarray
    sample_moments: tuple[float, float, float, float]
    n: int
    approximate: bool  # True when the ECDF came from the streaming sketch
    ks_floor: float = 0.0
    ks_mid: float = float("nan")

    def summary_dict(self) -> dict:
        return {
            "n": self.n,
            "ks_distance": self.ks,
            "ks_floor": self.ks_floor,
            "ks_mid": self.ks_mid,
            "approximate": self.approximate,
            "sample_moments": list(self.sample_moments),
        }

    def histogram_csv_text(self, provenance: dict | None = None) -> str:
        lines = []
        if provenance:
            meta = " ".join(f"{k}={v}" for k, v in sorted(provenance.items()))
            lines.append(f"# {meta}")
        lines.append("bin_lo,bin_hi,count")
        for i in range(len(self.hist_counts)):
            lines.append(
                f"{self.hist_edges[i]:.17g},{self.hist_edges[i + 1]:.17g},"
                f"{int(self.hist_counts[i])}"
            )
        return "\n".join(lines) + "\n"


def _sketch_ks(counts: np.ndarray, n: int) -> float:
    cum = np.cumsum(counts) / n
    cdf = phi_array(_SKETCH_EDGES[1:])
    return float(np.max(np.abs(cum - cdf)))


def _atom_diagnostics(sorted_values: np.ndarray) -> tuple[float, float]:
    """(largest atom / 2, mid-distribution KS) for a sorted sample."""
    n = sorted_values.size
    uniq, counts = np.unique(sorted_values, return_counts=True)
    mass = counts / n
    cum = np.cumsum(mass)
    floor = float(mass.max() / 2.0)
    ks_mid = float(np.max(np.abs(cum - mass / 2.0 - phi_array(uniq))))
    return floor, ks_mid


def fit_normalized(values: np.ndarray) -> FitReport:
    """Build the report from an array of already-normalized values."""
    n = int(values.size)
    if n < 1:
        raise ValueError("no values to fit")
    moments = tuple(float(np.mean(values**k)) for k in (1, 2, 3, 4))
    edges, counts = histogram(values)
    if n <= EXACT_ECDF_LIMIT:
        ecdf = make_ecdf(values)
        ks = ks_distance(ecdf)
        floor, ks_mid = _atom_diagnostics(ecdf.values)
        approx = False
    else:
        sk, _ = np.histogram(np.clip(values, -10.0, 10.0), bins=_SKETCH_EDGES)
        ks = _sketch_ks(sk, n)
        floor, ks_mid = 0.0, float("nan")
        approx = True
    return FitReport(
        ks=ks,
        hist_edges=edges,
        hist_counts=counts,
        sample_moments=moments,
        n=n,
        approximate=approx,
        ks_floor=floor,
        ks_mid=ks_mid,
    )


def normalized_poly_values(
    input_set: InputSet,
    q: PolyQ,
    gs: list[StronglyAdditive],
    bundle: StatBundle,
    table: PrimeTable,
) -> np.ndarray:
    """(Q(g_1(a), ..., g_l(a)) - A_Q) / B_Q over all elements, full values.

    Full values need every prime factor of every element, so the marking
    window covers the whole element range, independent of bundle.window.
    """
    if bundle.b_q <= 0.0:
        raise ZeroVarianceError("B_Q vanishes; cannot normalize")
    lo, hi = element_range(input_set)
    if table.limit < hi:
        raise CapabilityError(
            f"full values need primes up to {hi}, table stops at {table.limit}"
        )
    cover = window_up_to(table, hi)
    profiles = range_truncated_values(gs, cover, lo, hi)
    elems = element_values(input_set, table)
    idx = elems - lo
    coords = [prof[idx] for prof in profiles]
    qvals = eval_terms_on_arrays(q, coords)
    return (qvals - bundle.a_q) / bundle.b_q


def normalize_and_fit(
    input_set: InputSet,
    q: PolyQ,
    gs: list[StronglyAdditive],
    bundle: StatBundle,
    table: PrimeTable,
) -> FitReport:
    """Stream the input set and compare its normalized values to the normal law."""
    return fit_normalized(normalized_poly_values(input_set, q, gs, bundle, table))
