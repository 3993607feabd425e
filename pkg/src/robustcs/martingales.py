"""Robust nonnegative supermartingales, kept in log space.

The Catoni pair ``(M, N)`` at a candidate mean ``mu0`` multiplies, at each
step, ``exp(+/- phi_p(lam * (x - mu0)))`` divided by the robust denominator
``1 + lam**p * kappa / p + (p - 1/p) * epsilon``. The extra ``(p - 1/p)``
epsilon term is the spread of ``exp(phi_p)``, which pays for moving an
expectation from the corrupted law back to the clean one.

The betting process multiplies ``1 + lam * (x - mu0) - epsilon * |lam|`` for
data on ``[0, 1]``.
"""
import math
from dataclasses import dataclass, replace

import numpy as np

from .influence import check_order, exp_phi_p, phi_p


@dataclass(frozen=True)
class RcsConfig:
    """Problem parameters.

    Attributes
    ----------
    p : float
        Moment order in (1, 2].
    kappa : float
        Bound on the p-th absolute central moment (the variance bound when
        ``p == 2``).
    epsilon : float
        Total-variation contamination radius in [0, 1).
    alpha : float
        Miscoverage level in (0, 1).
    """

    p: float = 2.0
    kappa: float = 1.0
    epsilon: float = 0.0
    alpha: float = 0.05

    def __post_init__(self):
        object.__setattr__(self, "p", check_order(self.p))
        if not (self.kappa >= 0 and math.isfinite(self.kappa)):
            raise ValueError(f"kappa must be finite and >= 0, got {self.kappa!r}")
        if not (0.0 <= self.epsilon < 1.0):
            raise ValueError(f"epsilon must lie in [0, 1), got {self.epsilon!r}")
        if not (0.0 < self.alpha < 1.0):
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha!r}")

    @classmethod
    def from_variance(cls, sigma2, epsilon=0.0, alpha=0.05):
        return cls(p=2.0, kappa=sigma2, epsilon=epsilon, alpha=alpha)

    @property
    def sigma(self):
        """Standard deviation bound; only meaningful when ``p == 2``."""
        if self.p != 2.0:
            raise ValueError("sigma is defined only for p == 2")
        return math.sqrt(self.kappa)

    @property
    def spread(self):
        """Range of ``exp(phi_p)``, i.e. ``p - 1/p``."""
        return self.p - 1.0 / self.p

    def with_epsilon(self, epsilon):
        return replace(self, epsilon=epsilon)


@dataclass(frozen=True)
class SupermartingalePair:
    """Log values of the robust Catoni pair at a fixed candidate mean."""

    log_m: float = 0.0
    log_n: float = 0.0
    t: int = 0


@dataclass(frozen=True)
class BettingState:
    """Log wealth of the robust betting process; ``-inf`` once ruined."""

    log_l: float = 0.0
    t: int = 0


def _check_lambda(lam):
    lam = np.asarray(lam, dtype=float)
    if not np.all(lam > 0) or not np.all(np.isfinite(lam)):
        raise ValueError("lambda must be finite and > 0")
    return lam


def log_denominator(lam, cfg):
    """``log(1 + lam**p * kappa / p + (p - 1/p) * epsilon)``.

    Accepts a scalar or an array of weights.
    """
    lam = _check_lambda(lam)
    p = cfg.p
    out = np.log1p(lam ** p * cfg.kappa / p + cfg.spread * cfg.epsilon)
    return float(out) if out.ndim == 0 else out


def step_pair(pair, x, lam, mu0, cfg):
    """Advance the pair by one observation ``x`` with weight ``lam``."""
    if not math.isfinite(x):
        raise ValueError(f"observation must be finite, got {x!r}")
    d = log_denominator(lam, cfg)
    s = phi_p(lam * (x - mu0), cfg.p)
    return SupermartingalePair(pair.log_m + s - d, pair.log_n - s - d, pair.t + 1)


def log_pair_path(xs, lams, mu0, cfg):
    """Whole trajectories ``(log M_t, log N_t)`` for ``t = 1..len(xs)``.

    ``lams`` is a scalar or an array aligned with ``xs``.
    """
    xs = np.asarray(xs, dtype=float)
    lams = np.broadcast_to(_check_lambda(lams), xs.shape)
    s = np.atleast_1d(phi_p(lams * (xs - mu0), cfg.p))
    d = np.atleast_1d(log_denominator(lams, cfg))
    return np.cumsum(s - d), np.cumsum(-s - d)


@dataclass(frozen=True)
class DiscreteDistribution:
    """Finite-support law, used as an exact expectation oracle."""

    support: tuple
    weights: tuple

    def __post_init__(self):
        s = np.asarray(self.support, dtype=float)
        w = np.asarray(self.weights, dtype=float)
        if s.shape != w.shape or s.ndim != 1 or s.size == 0:
            raise ValueError("support and weights must be matching 1-d sequences")
        if np.any(w < 0) or abs(w.sum() - 1.0) > 1e-12:
            raise ValueError("weights must be nonnegative and sum to 1")
        object.__setattr__(self, "support", tuple(s.tolist()))
        object.__setattr__(self, "weights", tuple(w.tolist()))

    @classmethod
    def point_mass(cls, c):
        return cls((float(c),), (1.0,))

    def mixture(self, other, eps):
        """``(1 - eps) * self + eps * other``."""
        table = {}
        for s, w in zip(self.support, self.weights):
            table[s] = table.get(s, 0.0) + (1 - eps) * w
        for s, w in zip(other.support, other.weights):
            table[s] = table.get(s, 0.0) + eps * w
        keys = sorted(table)
        w = np.array([table[k] for k in keys])
        return DiscreteDistribution(tuple(keys), tuple((w / w.sum()).tolist()))

    @property
    def mean(self):
        return float(np.dot(self.support, self.weights))

    def central_moment(self, p):
        """``E|X - mean|**p``."""
        s = np.asarray(self.support)
        return float(np.dot(np.abs(s - self.mean) ** p, self.weights))

    def expect(self, fn):
        return float(np.dot(fn(np.asarray(self.support)), self.weights))


def tv_distance(a, b):
    """Exact total-variation distance between finite-support laws."""
    table = {}
    for s, w in zip(a.support, a.weights):
        table[s] = table.get(s, 0.0) + w
    for s, w in zip(b.support, b.weights):
        table[s] = table.get(s, 0.0) - w
    return 0.5 * sum(abs(v) for v in table.values())


def exact_expected_factor(q, lam, mu0, cfg, side="M"):
    """One-step expected multiplicative factor under ``q``, summed exactly.

    For ``q`` within TV distance epsilon of a law ``P`` with mean ``mu0`` and
    ``v_p(P) <= kappa`` this never exceeds 1.
    """
    if not isinstance(q, DiscreteDistribution):
        raise TypeError("q must be a DiscreteDistribution")
    lam = float(_check_lambda(lam))
    if side not in ("M", "N"):
        raise ValueError("side must be 'M' or 'N'")
    sign = 1.0 if side == "M" else -1.0
    num = q.expect(lambda s: exp_phi_p(sign * lam * (s - mu0), cfg.p))
    return num / (1.0 + lam ** cfg.p * cfg.kappa / cfg.p + cfg.spread * cfg.epsilon)


def _check_bet(x, lam, mu0, epsilon):
    if not (0.0 <= epsilon < 1.0):
        raise ValueError(f"epsilon must lie in [0, 1), got {epsilon!r}")
    if np.any(np.abs(lam) > 1.0 / (1.0 + epsilon)):
        raise ValueError("betting fraction must satisfy |lambda| <= 1/(1+epsilon)")
    if np.any((x < 0) | (x > 1)) or not (0.0 <= mu0 <= 1.0):
        raise ValueError("betting requires observations and mu0 in [0, 1]")


def betting_factor(x, lam, mu0, epsilon):
    """Wealth factor ``1 + lam * (x - mu0) - epsilon * |lam|`` (vectorized)."""
    x = np.asarray(x, dtype=float)
    lam = np.asarray(lam, dtype=float)
    _check_bet(x, lam, mu0, epsilon)
    # nonnegative under the checks; clip away -0.0 style rounding
    out = np.maximum(1.0 + lam * (x - mu0) - epsilon * np.abs(lam), 0.0)
    return float(out) if out.ndim == 0 else out


def betting_step(state, x, lam, mu0, epsilon):
    """Advance the robust betting process by one observation."""
    f = betting_factor(x, lam, mu0, epsilon)
    with np.errstate(divide="ignore"):
        log_f = float(np.log(f))
    return BettingState(state.log_l + log_f, state.t + 1)


def log_wealth_path(xs, lam, mu0, epsilon):
    """Cumulative ``log L_t`` for a whole stream."""
    f = np.atleast_1d(betting_factor(xs, lam, mu0, epsilon))
    with np.errstate(divide="ignore"):
        return np.cumsum(np.log(f))
