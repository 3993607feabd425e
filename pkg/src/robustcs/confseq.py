"""Streaming Huber-robust confidence sequence for the mean.

At time ``t`` with weights ``lam_i`` the interval is the level set

    { m : |f_t(m)| <= G_t },
    f_t(m) = sum_i phi_p(lam_i * (x_i - m)),
    G_t = log(2 / alpha) + sum_i log(1 + lam_i**p * kappa / p + (p - 1/p) * epsilon).

``f_t`` is continuous and nonincreasing, so both endpoints are found by
bracketed root finding, warm-started at the previous endpoints.
"""
import json
import math
import sys
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .influence import phi_p
from .martingales import RcsConfig, log_denominator

_EPS = sys.float_info.epsilon

FORMAT_VERSION = 1
_HEADER = "# robustcs tracker v{}"


@dataclass(frozen=True)
class ConstantSchedule:
    value: float

    def __call__(self, t):
        return np.full(np.shape(t), float(self.value)) if np.ndim(t) else float(self.value)

    def describe(self):
        return {"kind": "constant", "value": self.value}


@dataclass(frozen=True)
class PowerSchedule:
    """``lam_t = scale * t**exponent``."""

    scale: float
    exponent: float

    def __call__(self, t):
        return self.scale * np.asarray(t, dtype=float) ** self.exponent if np.ndim(t) \
            else self.scale * float(t) ** self.exponent

    def describe(self):
        return {"kind": "power", "scale": self.scale, "exponent": self.exponent}


def schedule_from_description(desc):
    if desc is None:
        return None
    if desc["kind"] == "constant":
        return ConstantSchedule(desc["value"])
    if desc["kind"] == "power":
        return PowerSchedule(desc["scale"], desc["exponent"])
    raise ValueError(f"unknown schedule kind {desc['kind']!r}")


def default_lambda(cfg):
    """Width-optimal constant weight.

    ``0.5 * sqrt(epsilon) / sigma`` when ``p == 2`` and
    ``(epsilon / kappa) ** (1 / p)`` otherwise.
    """
    if cfg.epsilon <= 0:
        raise ValueError("default weight needs epsilon > 0; pass an explicit "
                         "lambda or schedule when epsilon == 0")
    if cfg.kappa <= 0:
        raise ValueError("default weight needs kappa > 0")
    if cfg.p == 2.0:
        return 0.5 * math.sqrt(cfg.epsilon) / math.sqrt(cfg.kappa)
    return (cfg.epsilon / cfg.kappa) ** (1.0 / cfg.p)


def breakdown_feasible(cfg, lam):
    """True iff a constant weight ``lam`` eventually yields finite intervals."""
    if not lam > 0:
        raise ValueError("lambda must be > 0")
    return cfg.p > 1.0 + lam ** cfg.p * cfg.kappa / cfg.p + cfg.spread * cfg.epsilon


def finite_onset(cfg, lam):
    """Bound ``T`` such that the interval is finite for every ``t > T``.

    Returns ``inf`` when ``breakdown_feasible`` is false.
    """
    if not breakdown_feasible(cfg, lam):
        return math.inf
    gap = math.log(cfg.p) - log_denominator(lam, cfg)
    return math.log(2.0 / cfg.alpha) / gap


def first_finite_time(cfg, lam):
    """Smallest integer ``t`` with ``t log p > log(2/alpha) + t log(denominator)``.

    The interval at a constant weight is finite exactly from this time on,
    whatever the data. ``None`` when ``breakdown_feasible`` is false.
    """
    onset = finite_onset(cfg, lam)
    if math.isinf(onset):
        return None
    return math.floor(onset) + 1


@dataclass(frozen=True)
class ConfidenceInterval:
    lower: float
    upper: float
    tolerance: float = 0.0

    def __post_init__(self):
        if self.lower > self.upper:
            raise ValueError("lower endpoint exceeds upper endpoint")

    @property
    def width(self):
        return self.upper - self.lower

    @property
    def finite(self):
        return math.isfinite(self.lower) and math.isfinite(self.upper)

    def __contains__(self, m):
        return self.lower <= m <= self.upper

    def intersect(self, other):
        lo, hi = max(self.lower, other.lower), min(self.upper, other.upper)
        if lo > hi:
            # disjoint only through outward rounding slack; collapse
            mid = 0.5 * (lo + hi)
            lo = hi = mid
        return ConfidenceInterval(lo, hi, max(self.tolerance, other.tolerance))


REAL_LINE = ConfidenceInterval(-math.inf, math.inf)


class RobustConfidenceSequence:
    """Huber-robust confidence sequence tracker.

    Parameters
    ----------
    cfg : RcsConfig
    schedule : float, callable or None
        Weight schedule ``t -> lam_t`` evaluated on the 1-based index of the
        incoming observation, never on its value. A float means a constant
        weight; ``None`` uses :func:`default_lambda`.
    tol : float, optional
        Absolute root-finding tolerance; endpoints are rounded outward by it.
        Defaults to ``1e-9 * max(1, kappa ** (1/p))``.

    Notes
    -----
    The full history is kept since ``f_t`` has no finite sufficient
    statistic. ``update`` is cheap; the root finding happens in
    ``interval``.
    """

    def __init__(self, cfg, schedule=None, tol=None):
        self.cfg = cfg
        if schedule is None:
            schedule = ConstantSchedule(default_lambda(cfg))
        elif not callable(schedule):
            schedule = ConstantSchedule(float(schedule))
        self.schedule = schedule
        if tol is None:
            tol = 1e-9 * max(1.0, cfg.kappa ** (1.0 / cfg.p))
        if not tol > 0:
            raise ValueError("tol must be > 0")
        self.tol = float(tol)
        self._x = np.empty(64)
        self._lam = np.empty(64)
        self.t = 0
        self.log_denominator_sum = 0.0
        self.warm_lo = None
        self.warm_hi = None
        self._warm_est = None
        self._running = REAL_LINE

    # -- history -----------------------------------------------------------

    @property
    def xs(self):
        return self._x[: self.t]

    @property
    def lambdas(self):
        return self._lam[: self.t]

    @property
    def threshold(self):
        """``G_t = log(2/alpha) + sum_i log_denominator(lam_i)``."""
        return math.log(2.0 / self.cfg.alpha) + self.log_denominator_sum

    def _reserve(self, n):
        need = self.t + n
        if need > self._x.size:
            cap = max(need, 2 * self._x.size)
            for name in ("_x", "_lam"):
                buf = np.empty(cap)
                buf[: self.t] = getattr(self, name)[: self.t]
                setattr(self, name, buf)

    def _weights(self, start, n):
        ts = np.arange(start, start + n)
        if isinstance(self.schedule, (ConstantSchedule, PowerSchedule)):
            lams = np.asarray(self.schedule(ts), dtype=float)
        else:
            lams = np.array([float(self.schedule(int(s))) for s in ts])
        if not (np.all(np.isfinite(lams)) and np.all(lams > 0)):
            raise ValueError("schedule produced a non-positive or non-finite weight")
        return lams

    def update(self, x):
        """Append one observation."""
        return self.extend([x])

    def extend(self, xs, lambdas=None):
        """Append a batch of observations.

        ``lambdas`` overrides the schedule for this batch (used when
        restoring a checkpoint).
        """
        xs = np.asarray(xs, dtype=float).ravel()
        if not np.all(np.isfinite(xs)):
            bad = int(np.flatnonzero(~np.isfinite(xs))[0])
            raise ValueError(f"observation {self.t + bad + 1} is not finite")
        n = xs.size
        if n == 0:
            return self
        lams = self._weights(self.t + 1, n) if lambdas is None \
            else np.asarray(lambdas, dtype=float).ravel()
        if lams.size != n or not np.all(lams > 0):
            raise ValueError("lambdas must be positive and match the batch")
        d = np.atleast_1d(log_denominator(lams, self.cfg))
        self._reserve(n)
        self._x[self.t: self.t + n] = xs
        self._lam[self.t: self.t + n] = lams
        # sequential accumulation keeps G_t nondecreasing and path independent
        self.log_denominator_sum = float(
            np.cumsum(np.concatenate(([self.log_denominator_sum], d)))[-1])
        self.t += n
        return self

    # -- estimating function -----------------------------------------------

    def f(self, m):
        """``f_t(m) = sum_i phi_p(lam_i * (x_i - m))``."""
        if not math.isfinite(m):
            raise ValueError("m must be finite")
        if self.t == 0:
            return 0.0
        with np.errstate(over="ignore", invalid="ignore"):
            z = np.clip(self.lambdas * (self.xs - m), -2.0, 2.0)
        return float(np.sum(phi_p(z, self.cfg.p)))

    def _bracket_limits(self):
        reach = 2.0 / self.lambdas
        with np.errstate(over="ignore"):
            lo = float(np.min(self.xs - reach))
            hi = float(np.max(self.xs + reach))
        big = np.finfo(float).max
        return max(lo, -big), min(hi, big)

    def _solve(self, target, start):
        """Root of ``f_t(m) = target`` for ``|target| < t log p``."""
        lo_g, hi_g = self._bracket_limits()
        h = lambda m: self.f(m) - target  # noqa: E731
        if start is None or not math.isfinite(start):
            start = float(np.median(self.xs))
        start = min(max(start, lo_g), hi_g)
        w = 1.0 / float(self.lambdas[-1])
        a = b = start
        ha = hb = h(start)
        if ha == 0.0:
            return float(start)
        if ha > 0:
            # root lies to the right of start
            while hb > 0:
                a, ha = b, hb
                if b >= hi_g:
                    break
                b = min(start + w, hi_g)
                hb = h(b)
                w *= 2.0
        else:
            while ha < 0:
                b, hb = a, ha
                if a <= lo_g:
                    break
                a = max(start - w, lo_g)
                ha = h(a)
                w *= 2.0
        if not (ha >= 0 >= hb):
            raise RuntimeError(
                f"internal error: could not bracket f_t(m) = {target!r} "
                f"at t={self.t} (bracket [{lo_g}, {hi_g}])")
        if ha == 0.0:
            return float(a)
        if hb == 0.0:
            return float(b)
        return float(brentq(h, a, b, xtol=self.tol, rtol=4 * _EPS))

    def _outward(self, r):
        return self.tol + 4 * _EPS * abs(r)

    def interval(self, intersect=False):
        """Current confidence interval.

        Returns the whole real line while ``G_t >= t log p``, where the
        constraint is vacuous. With ``intersect=True`` the running
        intersection over all queried times is returned instead.
        """
        g = self.threshold
        if g >= self.t * math.log(self.cfg.p):
            ci = REAL_LINE
        else:
            lo = self._solve(g, self.warm_lo)
            hi = self._solve(-g, self.warm_hi)
            self.warm_lo, self.warm_hi = lo, hi
            ci = ConfidenceInterval(lo - self._outward(lo), hi + self._outward(hi),
                                    self.tol)
        self._running = self._running.intersect(ci)
        return self._running if intersect else ci

    def point_estimate(self):
        """Solution of ``f_t(m) = 0``; always inside :meth:`interval`."""
        if self.t == 0:
            raise ValueError("point estimate needs at least one observation")
        est = self._solve(0.0, self._warm_est)
        self._warm_est = est
        return est

    def covers(self, m):
        """Exact membership ``|f_t(m)| <= G_t`` without root finding."""
        return abs(self.f(m)) <= self.threshold

    # -- checkpointing -----------------------------------------------------

    def save(self, path_or_file):
        """Write a text checkpoint.

        Format: one header line ``# robustcs tracker v1 <json>`` holding the
        configuration, tolerance and schedule, then one ``t,x,lambda`` row per
        observation, floats written with ``repr`` so they round-trip exactly.
        """
        describe = getattr(self.schedule, "describe", None)
        meta = {
            "p": self.cfg.p, "kappa": self.cfg.kappa,
            "epsilon": self.cfg.epsilon, "alpha": self.cfg.alpha,
            "tol": self.tol,
            "schedule": describe() if describe else None,
        }
        lines = [_HEADER.format(FORMAT_VERSION) + " " + json.dumps(meta)]
        lines += [f"{i + 1},{x!r},{lam!r}"
                  for i, (x, lam) in enumerate(zip(self.xs.tolist(), self.lambdas.tolist()))]
        text = "\n".join(lines) + "\n"
        if hasattr(path_or_file, "write"):
            path_or_file.write(text)
        else:
            with open(path_or_file, "w") as fh:
                fh.write(text)

    @classmethod
    def load(cls, path_or_file, schedule=None):
        """Restore a checkpoint written by :meth:`save`.

        Custom callable schedules are not serialized; pass ``schedule`` to
        keep extending such a tracker.
        """
        if hasattr(path_or_file, "read"):
            text = path_or_file.read()
        else:
            with open(path_or_file) as fh:
                text = fh.read()
        lines = text.splitlines()
        prefix = _HEADER.format(FORMAT_VERSION)
        if not lines or not lines[0].startswith(prefix):
            raise ValueError("not a robustcs tracker checkpoint (v1)")
        meta = json.loads(lines[0][len(prefix):])
        cfg = RcsConfig(p=meta["p"], kappa=meta["kappa"],
                        epsilon=meta["epsilon"], alpha=meta["alpha"])
        sched = schedule or schedule_from_description(meta["schedule"])
        tracker = cls(cfg, schedule=sched if sched is not None else 1.0, tol=meta["tol"])
        xs, lams = [], []
        for k, line in enumerate(lines[1:], start=1):
            t, x, lam = line.split(",")
            if int(t) != k:
                raise ValueError(f"checkpoint row {k} has t={t}")
            xs.append(float(x))
            lams.append(float(lam))
        tracker.extend(xs, lambdas=lams)
        return tracker
