"""Comparators: the sample-split trimmed-mean interval and the eps = 0 CS."""
import math
from dataclasses import dataclass

import numpy as np

from .confseq import RobustConfidenceSequence, default_lambda


def eps_prime(t, epsilon, alpha):
    """Effective trimming level ``8 eps + 12 log(4/alpha) / (t/2)``."""
    return 8.0 * epsilon + 12.0 * math.log(4.0 / alpha) / (t / 2.0)


def trimmed_mean_defined(t, epsilon, alpha):
    """False when the two trimming quantiles cross and nothing is left."""
    return 2.0 * eps_prime(t, epsilon, alpha) < 1.0


@dataclass(frozen=True)
class TrimmedMeanReport:
    estimate: float
    half_width: float
    eps_prime: float
    defined: bool

    def interval(self):
        if not self.defined:
            return (-math.inf, math.inf)
        return (self.estimate - self.half_width, self.estimate + self.half_width)


def _check_trim(t, alpha):
    if t < 2:
        raise ValueError("trimmed mean needs at least two observations")
    if t / 2.0 < math.log(1.0 / (4.0 * alpha)):
        raise ValueError("trimmed mean needs t/2 >= log(1/(4 alpha))")


def trimmed_mean_estimate(data, epsilon, alpha):
    """Sample-split trimmed mean.

    The first half fixes the lower and upper empirical ``eps'``-quantiles;
    the second half is clamped to them and averaged. Returns ``nan`` when the
    quantiles cross (``2 eps' >= 1``).
    """
    x = np.asarray(data, dtype=float)
    t = x.size
    _check_trim(t, alpha)
    ep = eps_prime(t, epsilon, alpha)
    if 2.0 * ep >= 1.0:
        return math.nan
    first, second = x[: t // 2], x[t // 2:]
    lo, hi = np.quantile(first, [ep, 1.0 - ep])
    return float(np.mean(np.clip(second, lo, hi)))


def trimmed_mean_half_width(t, sigma, epsilon, alpha):
    """``12 sqrt(2 eps') sigma + 2 sigma sqrt(log(4/alpha) / (t/2))``."""
    ep = eps_prime(t, epsilon, alpha)
    return 12.0 * math.sqrt(2.0 * ep) * sigma + 2.0 * sigma * math.sqrt(
        math.log(4.0 / alpha) / (t / 2.0))


def trimmed_mean_report(data, sigma, epsilon, alpha):
    """Estimate and half-width; samples too short to split count as undefined."""
    t = len(data)
    if t < 2 or t / 2.0 < math.log(1.0 / (4.0 * alpha)):
        est = math.nan
    else:
        est = trimmed_mean_estimate(data, epsilon, alpha)
    return TrimmedMeanReport(
        estimate=est,
        half_width=trimmed_mean_half_width(t, sigma, epsilon, alpha),
        eps_prime=eps_prime(t, epsilon, alpha),
        defined=not math.isnan(est),
    )


def rrci_to_rci_params(epsilon, alpha, t):
    """Replacement level and resulting miscoverage when a replacement-robust
    interval is used against eps-contamination: ``(2 eps, alpha + exp(-2 t eps**2))``.
    """
    if not (0.0 < epsilon < 0.5):
        raise ValueError("epsilon must lie in (0, 0.5)")
    if t < 1:
        raise ValueError("t must be >= 1")
    return 2.0 * epsilon, alpha + math.exp(-2.0 * t * epsilon ** 2)


def trimmed_rci_report(data, sigma, epsilon, alpha):
    """Trimmed-mean RCI against eps-contamination, run at the replacement
    level ``2 eps``. Its true miscoverage is ``alpha + exp(-2 t eps**2)``.
    """
    eps_r, _ = rrci_to_rci_params(epsilon, alpha, len(data))
    return trimmed_mean_report(data, sigma, eps_r, alpha)


def nonrobust_cs(cfg, schedule=None, tol=None):
    """Catoni confidence sequence with the contamination radius set to zero.

    ``schedule`` defaults to the robust tuning of ``cfg`` so the two
    sequences are directly comparable.
    """
    if schedule is None:
        schedule = default_lambda(cfg)
    return RobustConfidenceSequence(cfg.with_epsilon(0.0), schedule=schedule, tol=tol)
