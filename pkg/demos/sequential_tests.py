"""Sequential tests built from the same supermartingale pair.

Three streams: one at the null, one shifted well past it, and one shifted
by 15 sigma sqrt(eps) where the one-sided e-process should grow at rate
eps / 4 per step.
"""
import math

from robustcs import RcsConfig, default_lambda
from robustcs.seqtest import TestState, growth_certificate, one_sided_step, two_sided_step
from robustcs.simulate import Gaussian, HuberMixture, StableLevy, replication_rng

cfg = RcsConfig.from_variance(9.0, epsilon=1 / 9, alpha=0.05)
lam = default_lambda(cfg)
shift = 15 * cfg.sigma * math.sqrt(cfg.epsilon)


def stream(mean, seed, n=2000):
    model = HuberMixture(Gaussian(mean, 9.0), StableLevy(0.75, 0.5, mean, 1.0), cfg.epsilon)
    return model.draw(replication_rng(seed, 0), n)


for label, mean in (("at the null", 0.0), ("shifted", shift)):
    two = TestState(mu0=0.0, cfg=cfg)
    one = TestState(mu0=0.0, cfg=cfg)
    for x in stream(mean, seed=3):
        two = two_sided_step(two, float(x), lam)
        one = one_sided_step(one, float(x), lam)
    print(f"{label:>12}: two-sided rejected at {two.rejected_at}, "
          f"one-sided at {one.rejected_at}, log e-value {one.e_value:.1f}, "
          f"growth certificate {growth_certificate(one, one.t, cfg.epsilon, 0.1)}")
