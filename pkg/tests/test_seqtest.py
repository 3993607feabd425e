import math

import numpy as np
import pytest

from robustcs.confseq import default_lambda
from robustcs.martingales import RcsConfig, SupermartingalePair, log_pair_path
from robustcs.seqtest import (
    IntervalTest,
    TestState,
    growth_certificate,
    one_sided_step,
    two_sided_step,
)
from robustcs.simulate import Gaussian, HuberMixture, StableLevy, replication_rng

CFG = RcsConfig.from_variance(9, 1 / 9)
LAM = default_lambda(CFG)


def fig2_like(mean):
    return HuberMixture(Gaussian(mean, 9), StableLevy(0.75, 0.5, mean, 1), 1 / 9)


def test_constant_stream_never_rejects():
    s = TestState(mu0=2.0, cfg=CFG)
    o = TestState(mu0=2.0, cfg=CFG)
    for _ in range(500):
        s = two_sided_step(s, 2.0, LAM)
        o = one_sided_step(o, 2.0, LAM)
    assert not s.rejected and not o.rejected
    assert s.pair.log_m < 0 and s.pair.log_n < 0


def test_lambda_must_be_positive():
    with pytest.raises(ValueError):
        one_sided_step(TestState(mu0=0.0, cfg=CFG), 1.0, 0.0)


def test_decision_sticks():
    s = TestState(mu0=0.0, cfg=CFG)
    for _ in range(300):
        s = two_sided_step(s, 30.0, LAM)
    assert s.rejected
    first = s.rejected_at
    for _ in range(3000):
        s = two_sided_step(s, 0.0, LAM)
    assert s.rejected and s.rejected_at == first


def _ever_reject(model, mu0, one_sided, reps, horizon, seed):
    level = math.log((1 if one_sided else 2) / CFG.alpha)
    hits = 0
    for r in range(reps):
        x = model.draw(replication_rng(seed, r), horizon)
        log_m, log_n = log_pair_path(x, LAM, mu0, CFG)
        stat = log_m if one_sided else np.maximum(log_m, log_n)
        hits += bool(np.any(stat > level))
    return hits / reps


def test_two_sided_type_one():
    rate = _ever_reject(fig2_like(0.0), 0.0, False, 500, 2000, 1)
    assert rate <= 0.05 + 2 * math.sqrt(0.05 * 0.95 / 500)


def test_one_sided_type_one():
    rate = _ever_reject(fig2_like(0.0), 0.0, True, 500, 2000, 2)
    assert rate <= 0.05 + 2 * math.sqrt(0.05 * 0.95 / 500)


def test_two_sided_power():
    shift = 20 * 3 * math.sqrt(1 / 9)
    rate = _ever_reject(fig2_like(shift), 0.0, False, 100, 2000, 3)
    assert rate == 1.0


def test_stepwise_matches_vectorized():
    x = fig2_like(1.0).draw(replication_rng(4, 0), 400)
    s = TestState(mu0=0.5, cfg=CFG)
    for xi in x:
        s = one_sided_step(s, xi, LAM)
    log_m, _ = log_pair_path(x, LAM, 0.5, CFG)
    assert s.pair.log_m == pytest.approx(log_m[-1], rel=1e-10)


def test_growth_certificate():
    s = TestState(mu0=0.0, cfg=CFG)
    assert not growth_certificate(s, 0, 1 / 9, 0.1)
    with pytest.raises(ValueError):
        growth_certificate(s, 5, 1 / 9, 0.1)
    null_hits = 0
    for r in range(100):
        x = fig2_like(0.0).draw(replication_rng(5, r), 2000)
        st = TestState(mu0=0.0, cfg=CFG)
        for xi in x:
            st = one_sided_step(st, xi, LAM)
        null_hits += growth_certificate(st, 2000, 1 / 9, 0.1)
    assert null_hits == 0
    shift = 15 * 3 * math.sqrt(1 / 9)
    hits = 0
    for r in range(40):
        x = fig2_like(shift).draw(replication_rng(8, r), 2000)
        log_m, _ = log_pair_path(x, LAM, 0.0, CFG)
        st = TestState(mu0=0.0, cfg=CFG, pair=SupermartingalePair(log_m[-1], 0.0, 2000))
        hits += growth_certificate(st, 2000, 1 / 9, 0.1)
    assert hits >= 38


def test_interval_duality():
    model = fig2_like(0.0)
    x = model.draw(replication_rng(6, 0), 1500)
    t_null = IntervalTest(CFG, 0.0)
    t_far = IntervalTest(CFG, 8.0)
    for xi in x:
        t_null.step(xi)
        t_far.step(xi)
    assert not t_null.rejected
    assert t_far.rejected
    # the same stream through the supermartingale route also rejects mu = 8
    s = TestState(mu0=8.0, cfg=CFG)
    for xi in x:
        s = two_sided_step(s, xi, LAM)
    assert s.rejected
