"""Window statistics: prime means, covariances, their extremes, and the
centering/scale pair for a polynomial in several additive functions.

All prime sums use compensated summation (math.fsum) over vectorized
per-prime terms; at half a million primes plain accumulation would already
cost several digits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .additive import PrimeWindow, StronglyAdditive, window_up_to
from .errors import ZeroVarianceError
from .inputs import DensityModel
from .poly import PolyQ
from .sieve import PrimeTable


def _mu_terms(g: StronglyAdditive, window: PrimeWindow, model: DensityModel):
    ps = window.primes
    if ps.size == 0:
        return np.zeros(0)
    return g.over(ps) * (model.h_over(ps) / ps)


def _kappa_terms(g1, g2, window: PrimeWindow, model: DensityModel):
    ps = window.primes
    if ps.size == 0:
        return np.zeros(0)
    hp = model.h_over(ps) / ps
    return g1.over(ps) * g2.over(ps) * hp * (1.0 - hp)


def mean_mu(
    g: StronglyAdditive, window: PrimeWindow, model: DensityModel
) -> float:
    """mu^P(g): the sum of g(p) h(p)/p over the window."""
    return math.fsum(_mu_terms(g, window, model))


def covariance_kappa(
    g1: StronglyAdditive,
    g2: StronglyAdditive,
    window: PrimeWindow,
    model: DensityModel,
) -> float:
    """kappa^P(g1, g2): sum of g1(p) g2(p) (h(p)/p)(1 - h(p)/p)."""
    return math.fsum(_kappa_terms(g1, g2, window, model))


def variance_sigma2(
    g: StronglyAdditive, window: PrimeWindow, model: DensityModel
) -> float:
    return covariance_kappa(g, g, window, model)


def frak_bounds(
    gs: list[StronglyAdditive], window: PrimeWindow, model: DensityModel
) -> tuple[float, float]:
    """(max mean, max variance) across the function family."""
    if not gs:
        raise ValueError("need at least one function")
    max_mean = max(mean_mu(g, window, model) for g in gs)
    max_var = max(variance_sigma2(g, window, model) for g in gs)
    return max_mean, max_var


def a_q(q: PolyQ, means: list[float]) -> float:
    """The centering A_Q: Q evaluated at the means."""
    return float(q.eval(means))


def b_q_squared(q: PolyQ, means: list[float], kappa: np.ndarray) -> float:
    """The variance radicand: sum over i, j of Q_i(mu) Q_j(mu) kappa_ij."""
    n = q.nvars
    grads = [float(q.partial(i).eval(means)) for i in range(n)]
    return math.fsum(
        grads[i] * grads[j] * float(kappa[i][j])
        for i in range(n)
        for j in range(n)
    )


def b_q(q: PolyQ, means: list[float], kappa: np.ndarray) -> float:
    """The scale B_Q: square root of the gradient-weighted covariance sum."""
    rad = b_q_squared(q, means, kappa)
    if rad < -1e-9:
        raise ZeroVarianceError(
            f"negative variance radicand {rad}; inputs are inconsistent"
        )
    return math.sqrt(max(rad, 0.0))


@dataclass(frozen=True)
class StatBundle:
    """All window statistics needed to center and scale Q(g_1, ..., g_l)."""

    window: PrimeWindow
    means: tuple[float, ...]
    kappa: np.ndarray  # symmetric l x l
    frak_m: float  # max mean
    frak_k: float  # max variance
    a_q: float
    b_q_squared: float
    b_q: float


def build_bundle(
    q: PolyQ,
    gs: list[StronglyAdditive],
    window: PrimeWindow,
    model: DensityModel,
) -> StatBundle:
    if q.nvars != len(gs):
        raise ValueError(f"Q has {q.nvars} variables but {len(gs)} functions given")
    means = tuple(mean_mu(g, window, model) for g in gs)
    n = len(gs)
    kappa = np.zeros((n, n))
    for i in range(n):
        for j in range(i, n):
            kappa[i, j] = kappa[j, i] = covariance_kappa(
                gs[i], gs[j], window, model
            )
    aq = a_q(q, list(means))
    rad = b_q_squared(q, list(means), kappa)
    if rad < -1e-9:
        raise ZeroVarianceError(f"negative variance radicand {rad}")
    return StatBundle(
        window=window,
        means=means,
        kappa=kappa,
        frak_m=max(means),
        frak_k=float(np.max(np.diag(kappa))),
        a_q=aq,
        b_q_squared=rad,
        b_q=math.sqrt(max(rad, 0.0)),
    )


class CumulativeStats:
    """One pass over a table's primes; bundles for any z come from slices.

    Keeps cumulative mean and covariance sums per prime index so that both
    the truncated-window and full-window bundles are served without
    re-scanning the primes.
    """

    def __init__(
        self,
        q: PolyQ,
        gs: list[StronglyAdditive],
        model: DensityModel,
        table: PrimeTable,
    ):
        if q.nvars != len(gs):
            raise ValueError("variable count mismatch")
        self.q = q
        self.gs = gs
        self.model = model
        self.table = table
        ps = table.primes
        hp = model.h_over(ps) / ps
        gv = [g.over(ps) for g in gs]
        self._cum_mu = [np.cumsum(gv[j] * hp) for j in range(len(gs))]
        self._cum_kap = {}
        for i in range(len(gs)):
            for j in range(i, len(gs)):
                self._cum_kap[(i, j)] = np.cumsum(gv[i] * gv[j] * hp * (1.0 - hp))

    def _cum_kappa(self, i, j):
        return self._cum_kap[(min(i, j), max(i, j))]

    def _idx(self, z: float) -> int:
        return int(np.searchsorted(self.table.primes, z, side="right"))

    def max_mean_at(self, z: float) -> float:
        k = self._idx(z)
        if k == 0:
            return 0.0
        return max(float(c[k - 1]) for c in self._cum_mu)

    def bundle_at(self, z: float) -> StatBundle:
        k = self._idx(z)
        n = len(self.gs)
        means = tuple(
            float(c[k - 1]) if k else 0.0 for c in self._cum_mu
        )
        kappa = np.zeros((n, n))
        for i in range(n):
            for j in range(i, n):
                v = float(self._cum_kappa(i, j)[k - 1]) if k else 0.0
                kappa[i, j] = kappa[j, i] = v
        window = window_up_to(self.table, z)
        aq = a_q(self.q, list(means))
        rad = b_q_squared(self.q, list(means), kappa)
        if rad < -1e-9:
            raise ZeroVarianceError(f"negative variance radicand {rad}")
        return StatBundle(
            window=window,
            means=means,
            kappa=kappa,
            frak_m=max(means),
            frak_k=float(np.max(np.diag(kappa))),
            a_q=aq,
            b_q_squared=rad,
            b_q=math.sqrt(max(rad, 0.0)),
        )


def choose_z(
    x: float,
    gs: list[StronglyAdditive],
    model: DensityModel,
    table: PrimeTable,
    rel_tol: float = 1e-6,
) -> float:
    """Smallest z with z^max(1, M(z)^(1/3)) >= x, M(z) = max mean over P(z).

    The exponent is a nondecreasing right-continuous step function of z and
    log z increases, so the defining inequality is monotone in z; bisection
    applies, and ties resolve downward to the smallest satisfying z.
    """
    if x < 16:
        raise ValueError(f"x must be at least 16, got {x}")
    if table.limit < x:
        raise ValueError(f"table limit {table.limit} below x = {x}")
    ps = table.primes
    hp = model.h_over(ps) / ps
    cums = [np.cumsum(g.over(ps) * hp) for g in gs]
    logx = math.log(x)

    def satisfied(z: float) -> bool:
        k = int(np.searchsorted(ps, z, side="right"))
        frak_m = max(float(c[k - 1]) for c in cums) if k else 0.0
        return max(1.0, frak_m ** (1.0 / 3.0)) * math.log(z) >= logx

    lo, hi = 2.0, float(x)
    if satisfied(lo):
        return lo
    while (hi - lo) > rel_tol * lo:
        mid = 0.5 * (lo + hi)
        if satisfied(mid):
            hi = mid
        else:
            lo = mid
    return hi


def mu1_loglog_slope(
    model: DensityModel, table: PrimeTable, samples: int = 24
) -> float:
    """Fitted slope of mu^P(t)(1) against loglog t (reported, not asserted)."""
    ps = table.primes
    cum = np.cumsum(model.h_over(ps) / ps)
    ts = np.geomspace(16.0, float(table.limit), samples)
    idx = np.searchsorted(ps, ts, side="right")
    keep = idx > 0
    ys = cum[idx[keep] - 1]
    xs = np.log(np.log(ts[keep]))
    if xs.size < 2:
        return float("nan")
    slope = np.polyfit(xs, ys, 1)[0]
    return float(slope)
