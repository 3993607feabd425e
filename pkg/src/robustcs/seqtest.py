"""Robust sequential tests for the mean.

Each test runs the robust Catoni pair at the hypothesized mean ``mu0``.
The two-sided test of ``mu = mu0`` rejects once either process exceeds
``2 / alpha``, which is exactly when the confidence sequence drops ``mu0``.
The one-sided test of ``mu <= mu0`` rejects once ``M`` exceeds ``1 / alpha``. Type-I error is controlled over the TV neighbourhood of the
null by Ville's inequality.
"""
import math
from dataclasses import dataclass, field, replace

from .confseq import RobustConfidenceSequence
from .martingales import SupermartingalePair, step_pair


@dataclass(frozen=True)
class TestState:
    """Running state of a robust sequential test.

    ``rejected_at`` is the first time the test rejected, or ``None``.
    """

    __test__ = False  # keep pytest from collecting this class

    mu0: float
    cfg: object
    pair: SupermartingalePair = field(default_factory=SupermartingalePair)
    rejected_at: int = None

    @property
    def rejected(self):
        return self.rejected_at is not None

    @property
    def t(self):
        return self.pair.t

    @property
    def e_value(self):
        """``max(M_t, N_t)`` in log space."""
        return max(self.pair.log_m, self.pair.log_n)


def _advance(state, x, lam, crossed):
    pair = step_pair(state.pair, x, lam, state.mu0, state.cfg)
    rejected_at = state.rejected_at
    if rejected_at is None and crossed(pair):
        rejected_at = pair.t
    return replace(state, pair=pair, rejected_at=rejected_at)


def two_sided_step(state, x, lam):
    """Advance and reject ``mu = mu0`` when ``max(M_t, N_t) > 2 / alpha``.

    Since ``M_t N_t < 1`` the two processes never exceed the level together;
    crossing by either one is the same event as ``|f_t(mu0)| > G_t``.
    """
    level = math.log(2.0 / state.cfg.alpha)
    return _advance(state, x, lam, lambda pr: max(pr.log_m, pr.log_n) > level)


def one_sided_step(state, x, lam):
    """Advance and reject ``mu <= mu0`` when ``M_t > 1 / alpha``."""
    level = math.log(1.0 / state.cfg.alpha)
    return _advance(state, x, lam, lambda pr: pr.log_m > level)


def growth_certificate(state, t, epsilon, delta):
    """Whether ``log M_t > log(delta / 4) + t * epsilon / 4``.

    Under the width-optimal tuning and a separation of ``14 sigma sqrt(eps)``
    this holds with probability at least ``1 - delta/2``. Returns ``False``
    at ``t = 0``: no data, no certificate.
    """
    if state.t != t:
        raise ValueError(f"state is at t={state.t}, asked about t={t}")
    if t == 0:
        return False
    return state.pair.log_m > math.log(delta / 4.0) + t * epsilon / 4.0


class IntervalTest:
    """Duality route: reject ``mu in [null_lo, null_hi]`` once the running
    confidence interval misses that set.

    Can differ from :func:`two_sided_step` at finite tolerance since the
    interval endpoints are rounded outward.
    """

    __test__ = False

    def __init__(self, cfg, null_lo, null_hi=None, schedule=None, tol=None):
        self.null_lo = null_lo
        self.null_hi = null_lo if null_hi is None else null_hi
        self.cs = RobustConfidenceSequence(cfg, schedule=schedule, tol=tol)
        self.rejected_at = None

    def step(self, x):
        self.cs.update(x)
        if self.rejected_at is None:
            ci = self.cs.interval()
            if ci.upper < self.null_lo or ci.lower > self.null_hi:
                self.rejected_at = self.cs.t
        return self

    @property
    def rejected(self):
        return self.rejected_at is not None
