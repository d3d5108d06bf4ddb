"""Acceptance criteria, one printed PASS/FAIL line per criterion.

Run with ``pytest tests/test_acceptance.py -s`` to see every line. Two KS
clauses (4c and 7b) are asserted at their stated bounds and currently fail:
the compared samples are integer-valued with a largest atom of mass ~0.38,
which floors the uncorrected sup-distance against any continuous CDF at
~0.19 regardless of centering and scale. The fit reports carry ks_floor
and ks_mid fields quantifying this; the remaining clauses of those
criteria pass and are asserted separately.
"""

import math
import random
import time
from fractions import Fraction

import numpy as np
import pytest

from ekac.additive import builtin_omega, omega_residue_class, window_up_to
from ekac.experiment import ExperimentConfig, run_experiment
from ekac.inputs import unit_model
from ekac.moments import MomentAccumulator, gaussian_moment_C, merge
from ekac.oracle import enumerate_two_to_one, run_suite
from ekac.poly import expand_R_m, make_poly
from ekac.sieve import factor_stream
from ekac.stats import covariance_kappa

from oracles import exact_unit_fraction_sum, trial_division_range


def _acc(criterion: str, ok: bool, detail: str) -> None:
    line = f"ACCEPTANCE {criterion}: {'PASS' if ok else 'FAIL'} ({detail})"
    print(line, flush=True)
    assert ok, line


def _classical_cfg(x: int, poly: str = "T1") -> ExperimentConfig:
    return ExperimentConfig(
        kind="all-integers",
        x=x,
        shift=0,
        poly=poly,
        functions=("omega",),
        z_policy="auto",
        z_value=None,
        m_max=8,
        seed=1,
        out_dir="out",
    )


@pytest.fixture(scope="module")
def classical_1e6():
    t0 = time.perf_counter()
    res = run_experiment(_classical_cfg(1_000_000), workers=1)
    return res, time.perf_counter() - t0


@pytest.fixture(scope="module")
def classical_1e4():
    return run_experiment(_classical_cfg(10_000), workers=1)


@pytest.fixture(scope="module")
def square_1e6():
    return run_experiment(_classical_cfg(1_000_000, poly="T1^2"), workers=1)


@pytest.fixture(scope="module")
def shifted_1e6():
    cfg = ExperimentConfig(
        kind="shifted-primes",
        x=1_000_000,
        shift=1,
        poly="T1",
        functions=("omega",),
        z_policy="auto",
        z_value=None,
        m_max=8,
        seed=1,
        out_dir="out",
    )
    return run_experiment(cfg, workers=1)


def test_criterion_1_exact_oracle_suite():
    t0 = time.perf_counter()
    rep = run_suite(seed=20_260_810)
    elapsed = time.perf_counter() - t0
    failing = [r.line() for r in rep.results if not r.passed]
    _acc(
        "1 exact-oracle-suite",
        rep.passed and elapsed <= 120.0,
        f"{len(rep.results)} checks, {elapsed:.1f}s" + "; ".join(failing),
    )


def test_criterion_2_pairing_counts_match_normal_moments():
    ok = True
    details = []
    for m in (2, 4, 6, 8):
        count = len(enumerate_two_to_one(m))
        lhs = count // math.factorial(m // 2)
        rhs = gaussian_moment_C(m)
        exact = count % math.factorial(m // 2) == 0 and lhs == rhs
        ok = ok and exact
        details.append(f"|T_{m}|/{m // 2}!={lhs} C={rhs}")
    _acc("2 pairing-count-cross-check", ok, ", ".join(details))


def test_criterion_3_expansion_structure_200_random():
    rng = random.Random(20_260_810)
    t0 = time.perf_counter()
    checked = 0
    for _ in range(200):
        nvars = rng.randint(1, 3)
        m = rng.choice((1, 1, 2, 2, 3))
        max_degree = {1: 4, 2: 3, 3: 2}[m]
        terms = {}
        for _ in range(rng.randint(1, 3)):
            exps = [0] * nvars
            for _ in range(rng.randint(1, max_degree)):
                exps[rng.randrange(nvars)] += 1
            key = tuple(exps)
            terms[key] = terms.get(key, 0) + rng.randint(1, 5)
        q = make_poly(nvars, terms)
        exp = expand_R_m(q, m)
        assert exp.min_x_degree() == m
        bound = q.degree * m
        for mon in exp.monomials:
            assert len(mon.x_vars) >= m
            assert len(mon.x_vars) + len(mon.y_vars) <= bound
        for _ in range(100):
            xs = [rng.randint(-3, 3) for _ in range(nvars)]
            ys = [rng.randint(-3, 3) for _ in range(nvars)]
            direct = (q.eval([a + b for a, b in zip(xs, ys)]) - q.eval(ys)) ** m
            assert exp.evaluate(xs, ys) == direct
        checked += 1
    _acc(
        "3 expansion-structure",
        checked == 200,
        f"200 polynomials, 100 exact points each, {time.perf_counter() - t0:.1f}s",
    )


def test_criterion_4a_classical_moment_ratios(classical_1e6):
    res, elapsed = classical_1e6
    ratios = {row.m: row.ratio for row in res.moment_report.rows}
    ok = (
        0.7 <= ratios[2] <= 1.3
        and abs(ratios[1]) <= 0.5
        and 1.5 <= ratios[4] <= 6.0
        and elapsed <= 60.0
    )
    _acc(
        "4a classical-moment-ratios",
        ok,
        f"m2={ratios[2]:.4f} in [0.7,1.3], |m1|={abs(ratios[1]):.4f} <= 0.5, "
        f"m4={ratios[4]:.4f} in [1.5,6], {elapsed:.1f}s <= 60s",
    )


def test_criterion_4b_ks_improves_with_x(classical_1e6, classical_1e4):
    res6, _ = classical_1e6
    ks6 = res6.fit_report.ks
    ks4 = classical_1e4.fit_report.ks
    _acc(
        "4b ks-ordering",
        ks6 < ks4,
        f"ks(1e6)={ks6:.4f} < ks(1e4)={ks4:.4f}",
    )


def test_criterion_4c_ks_bound(classical_1e6):
    """Known red: the largest value atom (mass ~0.38 at three prime factors)
    floors the uncorrected KS at ~0.19 for any continuous reference, so the
    0.15 bound cannot be met at this scale; ks_mid reports the
    atom-corrected distance."""
    res, _ = classical_1e6
    fit = res.fit_report
    _acc(
        "4c ks-bound",
        fit.ks <= 0.15,
        f"ks={fit.ks:.4f} vs bound 0.15; atom floor={fit.ks_floor:.4f}, "
        f"mid-distribution ks={fit.ks_mid:.4f}",
    )


def test_criterion_5_square_law(classical_1e6, square_1e6, table_1e6):
    res = square_1e6
    num, den = exact_unit_fraction_sum(table_1e6.primes.tolist())
    a_frac = Fraction(res.bundle_x.a_q)
    diff = abs(a_frac.numerator * den * den - num * num * a_frac.denominator)
    scale = num * num * a_frac.denominator
    ok_aq = diff * 10**12 <= scale
    # scaled integer division: diff/scale are ~1e6-digit integers
    rel_aq = (diff * 10**18 // scale) / 1e18
    mu = res.bundle_x.means[0]
    sig2 = float(res.bundle_x.kappa[0][0])
    want = 4.0 * mu * mu * sig2
    ok_bq = abs(res.bundle_x.b_q_squared - want) <= 1e-12 * want
    mean_norm = res.fit_report.sample_moments[0]
    ok_mean = abs(mean_norm) <= 0.5
    _acc(
        "5 square-law",
        ok_aq and ok_bq and ok_mean,
        f"A_Q vs exact rational rel={float(rel_aq):.2e} <= 1e-12; "
        f"B_Q^2 vs 4*mu^2*sigma^2 rel={abs(res.bundle_x.b_q_squared - want) / want:.2e}; "
        f"|normalized mean|={abs(mean_norm):.4f} <= 0.5",
    )


def test_criterion_6_class_covariance(table_1e6):
    g1 = omega_residue_class(4, 1)
    g2 = omega_residue_class(3, 1)
    window = window_up_to(table_1e6, 1_000_000)
    model = unit_model(1_000_000)
    kappa = covariance_kappa(g1, g2, window, model)
    ps = table_1e6.primes
    sel = ps[ps % 12 == 1].astype(np.float64)
    direct = float(np.sum((1.0 / sel) * (1.0 - 1.0 / sel)))
    rel = abs(kappa / direct - 1.0)
    _acc(
        "6 class-covariance",
        rel <= 0.10,
        f"kappa={kappa:.6f} vs direct mod-12 sum={direct:.6f}, rel={rel:.2e}",
    )


def test_criterion_7a_shifted_mean(shifted_1e6):
    res = shifted_1e6
    mu = res.bundle_x.means[0]
    sample_mean = res.bundle_x.a_q + res.fit_report.sample_moments[0] * res.bundle_x.b_q
    rel = abs(sample_mean / mu - 1.0)
    _acc(
        "7a shifted-mean",
        rel <= 0.10,
        f"sample mean={sample_mean:.4f} vs mu={mu:.4f}, rel={rel:.3f}",
    )


def test_criterion_7b_shifted_ks(shifted_1e6):
    """Known red for the same reason as 4c: measured 0.28 against the 0.25
    bound, with the atom floor at 0.19."""
    fit = shifted_1e6.fit_report
    _acc(
        "7b shifted-ks",
        fit.ks <= 0.25,
        f"ks={fit.ks:.4f} vs bound 0.25; atom floor={fit.ks_floor:.4f}, "
        f"mid-distribution ks={fit.ks_mid:.4f}",
    )


def test_criterion_8a_stream_matches_trial_division():
    got = ((r.value, r.primes) for r in factor_stream(2, 1_000_000))
    want = trial_division_range(2, 1_000_000)
    mismatch = 0
    for g, w in zip(got, want):
        if g != w:
            mismatch += 1
    _acc(
        "8a stream-vs-trial-division",
        mismatch == 0,
        f"10^6 - 1 records compared exactly, {mismatch} mismatches",
    )


def test_criterion_8b_partition_merge():
    window_x = 10_000
    from ekac.stats import build_bundle
    from ekac.poly import parse_poly
    from ekac.sieve import primes_up_to

    table = primes_up_to(window_x)
    g = builtin_omega()
    q = parse_poly("T1")
    window = window_up_to(table, window_x)
    model = unit_model(window_x)
    bundle = build_bundle(q, [g], window, model)

    single = MomentAccumulator(8, config_key=("c8",))
    for rec in factor_stream(1, window_x):
        single.add_record(rec, q, [g], window, bundle.a_q)

    bounds = np.array_split(np.arange(1, window_x + 1), 7)
    total = MomentAccumulator(8, config_key=("c8",))
    for chunk in bounds:
        acc = MomentAccumulator(8, config_key=("c8",))
        for rec in factor_stream(int(chunk[0]), int(chunk[-1])):
            acc.add_record(rec, q, [g], window, bundle.a_q)
        total = merge(total, acc)

    ok = total.count == single.count
    worst = 0.0
    for a, b in zip(total.power_sums[1:], single.power_sums[1:]):
        rel = abs(a - b) / max(abs(b), 1e-300)
        worst = max(worst, rel)
        ok = ok and rel <= 1e-9
    _acc("8b partition-merge", ok, f"7 partitions, worst rel diff {worst:.2e}")


def test_criterion_8c_desk_scale_runtime():
    t0 = time.perf_counter()
    res = run_experiment(_classical_cfg(10_000_000), workers=None)
    elapsed = time.perf_counter() - t0
    ok = elapsed <= 60.0 and res.fit_report.n == 10_000_000
    _acc(
        "8c desk-scale-runtime",
        ok,
        f"x=1e7 classical run in {elapsed:.1f}s (bound 60s), n={res.fit_report.n}",
    )
