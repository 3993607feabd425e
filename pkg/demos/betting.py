"""Robust betting on a bounded stream.

Against a Bernoulli(mu) null contaminated with eps mass at 1, the wealth
process stays a nonnegative supermartingale. Under a true mean further than
eps away it grows.
"""
import math

import numpy as np

from robustcs.martingales import log_wealth_path
from robustcs.simulate import replication_rng

eps, lam, mu0, horizon = 0.05, 0.5, 0.3, 10_000


def bernoulli_stream(mean, seed):
    rng = replication_rng(seed, 0)
    clean = (rng.random(horizon) < mean).astype(float)
    return np.where(rng.random(horizon) < eps, 1.0, clean)


for mean in (mu0, mu0 + 0.2):
    path = log_wealth_path(bernoulli_stream(mean, seed=5), lam, mu0, eps)
    crossed = np.flatnonzero(path >= math.log(20))
    first = int(crossed[0]) + 1 if crossed.size else None
    print(f"true mean {mean:.1f}: sup log wealth {path.max():8.2f}, crosses 20 at t={first}")
