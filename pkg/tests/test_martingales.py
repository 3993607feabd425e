import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import expected_factor_ref, phi_ref, supermartingale_cases
from robustcs.influence import phi
from robustcs.martingales import (
    BettingState,
    DiscreteDistribution,
    RcsConfig,
    SupermartingalePair,
    betting_factor,
    betting_step,
    exact_expected_factor,
    log_denominator,
    log_pair_path,
    log_wealth_path,
    step_pair,
    tv_distance,
)


def test_config_validation():
    with pytest.raises(ValueError):
        RcsConfig(kappa=-1)
    with pytest.raises(ValueError):
        RcsConfig(epsilon=1.0)
    with pytest.raises(ValueError):
        RcsConfig(alpha=0.0)
    with pytest.raises(ValueError):
        RcsConfig(p=1.0)
    assert RcsConfig.from_variance(9).sigma == 3.0


def test_log_denominator_values():
    cfg = RcsConfig(p=2, kappa=1, epsilon=0.1)
    assert log_denominator(0.5, cfg) == pytest.approx(math.log(1.275), rel=1e-15)
    assert log_denominator(0.5, cfg) == pytest.approx(0.242946, abs=1e-6)
    assert log_denominator(1.0, RcsConfig(p=2, kappa=0, epsilon=0)) == 0.0
    cfg15 = RcsConfig(p=1.5, kappa=2, epsilon=0.06)
    expected = math.log(1 + 2 / 1.5 + (1.5 - 2 / 3) * 0.06)
    assert log_denominator(1.0, cfg15) == pytest.approx(expected, rel=1e-15)
    assert expected == pytest.approx(math.log(2.383333333), rel=1e-9)
    for bad in (0.0, -1.0):
        with pytest.raises(ValueError):
            log_denominator(bad, cfg)


def test_step_pair_values():
    cfg = RcsConfig(p=2, kappa=1, epsilon=0.1)
    pair = step_pair(SupermartingalePair(), 0.5, 0.5, 0.0, cfg)
    # direct product of one factor
    m_direct = math.exp(phi_ref(0.25)) / 1.275
    assert pair.log_m == pytest.approx(phi(0.25) - math.log(1.275), rel=1e-15)
    assert math.exp(pair.log_m) == pytest.approx(m_direct, rel=1e-14)
    assert pair.t == 1

    same = step_pair(SupermartingalePair(), 3.0, 0.7, 3.0, cfg)
    d = log_denominator(0.7, cfg)
    assert same.log_m == same.log_n == -d

    pr = SupermartingalePair()
    for _ in range(25):
        pr = step_pair(pr, 1.0, 0.3, 1.0, cfg)
    assert pr.log_m == pytest.approx(-25 * log_denominator(0.3, cfg), rel=1e-14)
    with pytest.raises(ValueError):
        step_pair(pr, math.nan, 0.3, 0.0, cfg)


@given(st.floats(-100, 100), st.floats(0.01, 2), st.floats(0, 0.5), st.sampled_from([1.2, 1.5, 2.0]))
def test_pair_duality(x, lam, eps, p):
    cfg = RcsConfig(p=p, kappa=1.3, epsilon=eps)
    pr = step_pair(SupermartingalePair(), x, lam, 0.0, cfg)
    assert pr.log_m + pr.log_n == pytest.approx(-2 * log_denominator(lam, cfg), rel=1e-12, abs=1e-14)


def test_eps_zero_reduces_to_catoni():
    cfg = RcsConfig(p=2, kappa=4, epsilon=0)
    lam, x = 0.3, 1.7
    pr = step_pair(SupermartingalePair(), x, lam, 0.0, cfg)
    assert math.exp(pr.log_m) == pytest.approx(
        math.exp(phi_ref(lam * x)) / (1 + lam ** 2 * 4 / 2), rel=1e-14)


def test_log_space_matches_direct_product():
    rng = np.random.default_rng(4)
    cfg = RcsConfig(p=1.5, kappa=2.0, epsilon=0.05)
    xs = rng.standard_t(3, size=1000)
    lams = rng.uniform(0.05, 0.5, size=1000)
    log_m, log_n = log_pair_path(xs, lams, 0.1, cfg)
    prod_m = prod_n = 1.0
    pr = SupermartingalePair()
    for t, (x, lam) in enumerate(zip(xs, lams)):
        den = 1 + lam ** 1.5 * 2.0 / 1.5 + (1.5 - 1 / 1.5) * 0.05
        prod_m *= math.exp(phi_ref(lam * (x - 0.1), 1.5)) / den
        prod_n *= math.exp(-phi_ref(lam * (x - 0.1), 1.5)) / den
        pr = step_pair(pr, x, lam, 0.1, cfg)
        assert math.exp(log_m[t]) == pytest.approx(prod_m, rel=1e-9)
        assert math.exp(log_n[t]) == pytest.approx(prod_n, rel=1e-9)
    assert pr.log_m == pytest.approx(log_m[-1], rel=1e-9)


def test_expected_factor_worked_examples():
    cfg = RcsConfig(p=2, kappa=1, epsilon=0.1)
    q = DiscreteDistribution((-1.0, 1.0), (0.5, 0.5))
    v = exact_expected_factor(q, 0.5, 0.0, cfg, "M")
    assert v == pytest.approx((1.6 + 0.625) / 2 / 1.275, rel=1e-14)
    assert v == pytest.approx(0.872549, abs=1e-6)

    for lam in (0.5, 1.0, 2.0):
        for kappa in (0.0, 1.0, 5.0):
            c = 1 / lam + 0.5
            q = DiscreteDistribution((0.0, c), (0.9, 0.1))
            got = exact_expected_factor(q, lam, 0.0, RcsConfig(p=2, kappa=kappa, epsilon=0.1), "M")
            assert got == pytest.approx(1.1 / (1 + lam ** 2 * kappa / 2 + 0.15), rel=1e-14)
            assert got <= 1.1 / 1.15 + 1e-15

    pm = DiscreteDistribution.point_mass(2.0)
    assert exact_expected_factor(pm, 0.4, 2.0, cfg, "N") == pytest.approx(1 / (1 + 0.08 + 0.15))
    with pytest.raises(ValueError):
        DiscreteDistribution((0.0, 1.0), (0.5, 0.6))


def test_supermartingale_oracle_suite():
    cases = supermartingale_cases(seed=11)
    assert len(cases) >= 50
    for P, Q, lam, p, kappa, eps, side in cases:
        assert tv_distance(P, Q) <= eps + 1e-12
        assert P.central_moment(p) <= kappa
        cfg = RcsConfig(p=p, kappa=kappa, epsilon=eps)
        got = exact_expected_factor(Q, lam, P.mean, cfg, side)
        ref = expected_factor_ref(Q.support, Q.weights, lam, P.mean, p, kappa, eps,
                                  1 if side == "M" else -1)
        assert got == pytest.approx(ref, rel=1e-12)
        assert got <= 1 + 1e-12


def test_tv_distance():
    a = DiscreteDistribution((0.0, 1.0), (0.5, 0.5))
    b = DiscreteDistribution((1.0, 2.0), (0.5, 0.5))
    assert tv_distance(a, b) == pytest.approx(0.5)
    assert tv_distance(a, a) == 0.0
    mix = a.mixture(DiscreteDistribution.point_mass(7.0), 0.2)
    assert tv_distance(a, mix) == pytest.approx(0.2)


def test_betting_examples():
    s = betting_step(BettingState(), 0.3, 0.0, 0.5, 0.1)
    assert s.log_l == 0.0 and s.t == 1
    assert betting_factor(0.5, 0.5, 0.5, 0.1) == pytest.approx(0.95)
    with pytest.raises(ValueError):
        betting_step(BettingState(), 0.5, 1.2, 0.5, 0.1)
    with pytest.raises(ValueError):
        betting_step(BettingState(), 1.5, 0.5, 0.5, 0.1)
    ruined = betting_step(BettingState(), 0.0, 0.8, 1.0, 0.25)
    assert ruined.log_l == -math.inf


@settings(max_examples=300)
@given(st.floats(0, 1), st.floats(0, 1), st.floats(0, 0.99), st.floats(-1, 1))
def test_betting_factor_nonnegative(x, mu0, eps, u):
    lam = u / (1 + eps)
    assert betting_factor(x, lam, mu0, eps) >= 0


@pytest.mark.parametrize("mu", [0.1, 0.5, 0.9])
@pytest.mark.parametrize("lam", [-0.8, -0.2, 0.3, 0.9])
def test_betting_expectation_under_p(mu, lam):
    eps = 0.1
    # Bernoulli(mu): exact expectation 1 - eps |lam|
    e = mu * betting_factor(1.0, lam, mu, eps) + (1 - mu) * betting_factor(0.0, lam, mu, eps)
    assert e == pytest.approx(1 - eps * abs(lam), abs=1e-15)


def test_log_wealth_path():
    xs = np.array([0.0, 1.0, 1.0, 0.0])
    path = log_wealth_path(xs, 0.5, 0.5, 0.05)
    direct = np.cumsum(np.log([1 - 0.25 - 0.025, 1 + 0.25 - 0.025, 1.225, 0.725]))
    np.testing.assert_allclose(path, direct, rtol=1e-14)
