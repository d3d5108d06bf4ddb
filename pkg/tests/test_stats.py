import math
import random
from fractions import Fraction

import numpy as np
import pytest

from ekac.additive import (
    StronglyAdditive,
    builtin_omega,
    omega_residue_class,
    window_from_primes,
    window_up_to,
)
from ekac.inputs import shifted_model, unit_model
from ekac.poly import make_poly, parse_poly
from ekac.stats import (
    CumulativeStats,
    a_q,
    b_q,
    b_q_squared,
    build_bundle,
    choose_z,
    covariance_kappa,
    frak_bounds,
    mean_mu,
    mu1_loglog_slope,
    variance_sigma2,
)


def test_mean_small_window_exact_value():
    g = builtin_omega()
    w = window_from_primes([2, 3, 5, 7])
    mu = mean_mu(g, w, unit_model())
    assert abs(mu - float(Fraction(247, 210))) < 1e-15


def test_mean_empty_window():
    g = builtin_omega()
    w = window_from_primes([])
    assert mean_mu(g, w, unit_model()) == 0.0


def test_mean_tracks_loglog(table_1e6):
    g = builtin_omega()
    w = window_up_to(table_1e6, 1_000_000)
    mu = mean_mu(g, w, unit_model())
    direct = sum(1.0 / p for p in w.primes.tolist())  # plain-order oracle
    assert abs(mu - direct) < 1e-9
    assert abs(mu - math.log(math.log(1_000_000))) <= 1.0  # Mertens O(1)


def test_covariance_small_window_exact():
    g = builtin_omega()
    w = window_from_primes([2, 3])
    k = covariance_kappa(g, g, w, unit_model())
    assert abs(k - float(Fraction(17, 36))) < 1e-15


def test_covariance_zero_function():
    g = builtin_omega()
    zero = StronglyAdditive("zero", lambda p: 0, bound=0)
    w = window_from_primes([2, 3, 5])
    assert covariance_kappa(g, zero, w, unit_model()) == 0.0


def test_variance_is_diagonal_covariance(table_1e4):
    g = omega_residue_class(4, 1)
    w = window_up_to(table_1e4, 500)
    m = shifted_model(1)
    assert variance_sigma2(g, w, m) == covariance_kappa(g, g, w, m)


def test_frak_bounds_single_function(table_1e4):
    g = builtin_omega()
    w = window_up_to(table_1e4, 100)
    m = unit_model()
    fm, fk = frak_bounds([g], w, m)
    assert fm == mean_mu(g, w, m)
    assert fk == variance_sigma2(g, w, m)


def test_frak_k_below_g_times_frak_m(table_1e4):
    gs = [builtin_omega(), omega_residue_class(3, 1)]
    w = window_up_to(table_1e4, 2000)
    m = unit_model()
    fm, fk = frak_bounds(gs, w, m)
    assert fk <= 1.0 * fm + 1e-12  # G = 1 for both


def test_cauchy_schwarz_on_random_windows(table_1e4):
    rng = random.Random(31)
    all_primes = table_1e4.primes.tolist()
    for _ in range(25):
        ps = rng.sample(all_primes[:200], rng.randint(2, 12))
        w = window_from_primes(ps)
        g1 = omega_residue_class(4, 1)
        g2 = omega_residue_class(3, 1)
        m = unit_model()
        k12 = covariance_kappa(g1, g2, w, m)
        s1 = variance_sigma2(g1, w, m)
        s2 = variance_sigma2(g2, w, m)
        assert abs(k12) <= max(s1, s2) + 1e-15


def test_a_q_forms(table_1e4):
    g = builtin_omega()
    w = window_up_to(table_1e4, 300)
    m = unit_model()
    mu = mean_mu(g, w, m)
    for delta in (1, 2, 3):
        q = make_poly(1, {(delta,): 1})
        assert a_q(q, [mu]) == pytest.approx(mu**delta, rel=1e-15)
    q2 = make_poly(2, {(1, 1): 1})
    assert a_q(q2, [2.0, 3.0]) == 6.0
    lin = parse_poly("2*T1 + 3*T2")
    assert a_q(lin, [1.5, 2.5]) == 2 * 1.5 + 3 * 2.5


def test_b_q_power_rule(table_1e4):
    g = builtin_omega()
    w = window_up_to(table_1e4, 300)
    m = unit_model()
    mu = mean_mu(g, w, m)
    sig2 = variance_sigma2(g, w, m)
    kappa = np.array([[sig2]])
    for delta in (1, 2, 3):
        q = make_poly(1, {(delta,): 1})
        want = delta * mu ** (delta - 1) * math.sqrt(sig2)
        assert b_q(q, [mu], kappa) == pytest.approx(want, rel=1e-12)


def test_b_q_product_rule(table_1e4):
    g1 = omega_residue_class(4, 1)
    g2 = omega_residue_class(3, 1)
    w = window_up_to(table_1e4, 2000)
    m = unit_model()
    mu1, mu2 = mean_mu(g1, w, m), mean_mu(g2, w, m)
    k = np.array(
        [
            [variance_sigma2(g1, w, m), covariance_kappa(g1, g2, w, m)],
            [covariance_kappa(g1, g2, w, m), variance_sigma2(g2, w, m)],
        ]
    )
    q = make_poly(2, {(1, 1): 1})
    want = math.sqrt(
        mu1**2 * k[1, 1] + 2 * mu1 * mu2 * k[0, 1] + mu2**2 * k[0, 0]
    )
    assert b_q(q, [mu1, mu2], k) == pytest.approx(want, rel=1e-12)


def test_b_q_identity_poly_squared_is_kappa(table_1e4):
    g = builtin_omega()
    w = window_up_to(table_1e4, 500)
    m = unit_model()
    sig2 = variance_sigma2(g, w, m)
    q = make_poly(1, {(1,): 1})
    assert b_q_squared(q, [mean_mu(g, w, m)], np.array([[sig2]])) == sig2


def test_b_q_negative_radicand_rejected():
    from ekac.errors import ZeroVarianceError

    q = make_poly(1, {(1,): 1})
    with pytest.raises(ZeroVarianceError):
        b_q(q, [1.0], np.array([[-1.0]]))


def test_bundle_consistency(table_1e4):
    gs = [builtin_omega(), omega_residue_class(4, 1)]
    q = parse_poly("T1*T2")
    m = unit_model()
    w = window_up_to(table_1e4, 4000)
    b = build_bundle(q, gs, w, m)
    assert b.kappa[0, 1] == b.kappa[1, 0]
    assert b.frak_m == max(b.means)
    assert b.frak_k == max(b.kappa[0, 0], b.kappa[1, 1])
    assert b.b_q == pytest.approx(math.sqrt(b.b_q_squared), rel=1e-15)
    assert abs(b.b_q_squared - b_q_squared(q, list(b.means), b.kappa)) <= 1e-12 * b.b_q_squared


def test_cumulative_matches_direct(table_1e4):
    gs = [builtin_omega(), omega_residue_class(3, 1)]
    q = parse_poly("T1*T2")
    m = shifted_model(1)
    cs = CumulativeStats(q, gs, m, table_1e4)
    for z in (10.0, 97.0, 1234.0, 10_000.0):
        direct = build_bundle(q, gs, window_up_to(table_1e4, z), m)
        viaview = cs.bundle_at(z)
        assert viaview.means == pytest.approx(direct.means, rel=1e-12)
        assert viaview.a_q == pytest.approx(direct.a_q, rel=1e-12)
        assert viaview.b_q == pytest.approx(direct.b_q, rel=1e-12)


def test_window_splitting(table_1e4):
    g = builtin_omega()
    m = unit_model()
    z1, z2 = 100.0, 5000.0
    w1 = window_up_to(table_1e4, z1)
    w2 = window_up_to(table_1e4, z2)
    between = window_from_primes(
        [p for p in table_1e4.primes.tolist() if z1 < p <= z2]
    )
    lhs = mean_mu(g, w2, m)
    rhs = mean_mu(g, w1, m) + mean_mu(g, between, m)
    assert lhs == pytest.approx(rhs, rel=1e-14)


def test_monotone_in_z(table_1e4):
    g = builtin_omega()
    m = unit_model()
    zs = [10, 100, 1000, 10_000]
    mus = [mean_mu(g, window_up_to(table_1e4, z), m) for z in zs]
    ks = [variance_sigma2(g, window_up_to(table_1e4, z), m) for z in zs]
    assert mus == sorted(mus)
    assert ks == sorted(ks)


def test_choose_z_exponent_one(table_1e4):
    zero = StronglyAdditive("zero", lambda p: 0, bound=0)
    z = choose_z(10_000.0, [zero], unit_model(), table_1e4)
    assert z == pytest.approx(10_000.0, rel=1e-6)


def test_choose_z_exponent_two(table_1e6):
    # g supported on p = 2 alone with g(2) = 16 keeps the max mean at 8 for
    # every z >= 2, so the defining inequality is z^2 >= x and z = sqrt(x)
    g = StronglyAdditive("spike", lambda p: 16 if p == 2 else 0, bound=16)
    z = choose_z(1_000_000.0, [g], unit_model(), table_1e6)
    assert z == pytest.approx(1000.0, rel=1e-5)


def test_choose_z_residual(table_1e6):
    g = builtin_omega()
    m = unit_model()
    x = 1_000_000.0
    z = choose_z(x, [g], m, table_1e6)
    w = window_up_to(table_1e6, z)
    frak_m = mean_mu(g, w, m)
    val = z ** max(1.0, frak_m ** (1.0 / 3.0))
    assert x <= val <= x ** (1 + 1e-6)


def test_choose_z_requires_x_at_least_16(table_1e4):
    with pytest.raises(ValueError):
        choose_z(10.0, [builtin_omega()], unit_model(), table_1e4)


def test_mu1_slope_diagnostic(table_1e6):
    s = mu1_loglog_slope(unit_model(), table_1e6)
    assert 0.5 < s < 1.5  # near 1 for the full-integer model, not asserted tightly
