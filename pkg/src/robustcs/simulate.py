"""Data models and the Monte Carlo replication runner.

Distributions and contamination models are small frozen dataclasses with a
``draw(rng, n)`` method and a JSON round trip (``to_dict`` / ``from_dict``).

Seeds: replication ``r`` of a run with ``base_seed`` draws from
``numpy.random.default_rng(SeedSequence(base_seed, spawn_key=(r,)))``, the same
stream as ``SeedSequence(base_seed).spawn(...)[r]``. Replications are thus
independent and can run in any order.
"""
import csv
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .baselines import trimmed_rci_report
from .confseq import PowerSchedule, RobustConfidenceSequence, default_lambda
from .martingales import DiscreteDistribution, RcsConfig, log_pair_path, tv_distance

_FMAX = np.finfo(float).max


def replication_rng(base_seed, rep):
    return np.random.default_rng(np.random.SeedSequence(base_seed, spawn_key=(rep,)))


# -- distributions ------------------------------------------------------------

@dataclass(frozen=True)
class Gaussian:
    mean: float = 0.0
    variance: float = 1.0

    def __post_init__(self):
        if not self.variance > 0:
            raise ValueError("Gaussian variance must be > 0")

    def draw(self, rng, n):
        return rng.normal(self.mean, math.sqrt(self.variance), size=n)

    def central_moment(self, p):
        s = math.sqrt(self.variance)
        return s ** p * 2 ** (p / 2) * math.gamma((p + 1) / 2) / math.sqrt(math.pi)


@dataclass(frozen=True)
class PointMass:
    c: float = 0.0

    def draw(self, rng, n):
        return np.full(n, float(self.c))

    @property
    def mean(self):
        return float(self.c)

    def central_moment(self, p):
        return 0.0

    def as_discrete(self):
        return DiscreteDistribution.point_mass(self.c)


@dataclass(frozen=True)
class TwoPoint:
    """``a`` with probability ``prob_a``, else ``b``."""

    a: float
    b: float
    prob_a: float

    def __post_init__(self):
        if not (0.0 <= self.prob_a <= 1.0):
            raise ValueError("prob_a must lie in [0, 1]")

    def draw(self, rng, n):
        return np.where(rng.random(n) < self.prob_a, float(self.a), float(self.b))

    @property
    def mean(self):
        return self.prob_a * self.a + (1 - self.prob_a) * self.b

    def central_moment(self, p):
        return self.as_discrete().central_moment(p)

    def as_discrete(self):
        if self.prob_a in (0.0, 1.0) or self.a == self.b:
            return DiscreteDistribution.point_mass(self.a if self.prob_a > 0 else self.b)
        return DiscreteDistribution((self.a, self.b), (self.prob_a, 1 - self.prob_a))


@dataclass(frozen=True)
class StableLevy:
    """Levy alpha-stable law in Nolan's S0 parameterization.

    S0 is continuous in the stability index at 1; ``loc`` is the S0
    location, which is not the mean even when the mean exists.
    """

    stability: float
    skew: float = 0.0
    loc: float = 0.0
    scale: float = 1.0

    def __post_init__(self):
        if not (0.0 < self.stability <= 2.0):
            raise ValueError("stability must lie in (0, 2]")
        if not (-1.0 <= self.skew <= 1.0):
            raise ValueError("skew must lie in [-1, 1]")
        if not self.scale > 0:
            raise ValueError("scale must be > 0")

    @property
    def mean(self):
        if self.stability <= 1.0:
            return None
        if self.stability == 2.0:
            return self.loc
        return self.loc - self.skew * self.scale * math.tan(math.pi * self.stability / 2)

    def draw(self, rng, n):
        a, b = self.stability, self.skew
        v = rng.uniform(-math.pi / 2, math.pi / 2, size=n)
        w = rng.standard_exponential(size=n)
        with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
            if a == 1.0:
                h = math.pi / 2 + b * v
                x = (2 / math.pi) * (h * np.tan(v) - b * np.log(
                    (math.pi / 2) * w * np.cos(v) / h))
                out = self.scale * x + self.loc
            else:
                zeta = b * math.tan(math.pi * a / 2)
                shift = math.atan(zeta) / a
                s = (1 + zeta ** 2) ** (1 / (2 * a))
                x = s * np.sin(a * (v + shift)) / np.cos(v) ** (1 / a) * (
                    np.cos(v - a * (v + shift)) / w) ** ((1 - a) / a)
                # x is standard S1; the S0 location is the S1 one plus scale * zeta
                out = self.scale * (x - zeta) + self.loc
        # extreme draws of very heavy tails can overflow; they are outliers anyway
        return np.nan_to_num(out, nan=0.0, posinf=_FMAX, neginf=-_FMAX)


@dataclass(frozen=True)
class SymmetricPareto:
    """``scale * sign * U**(-1/tail)``: symmetric, Pareto(1, tail) magnitudes."""

    tail: float
    scale: float = 1.0

    def draw(self, rng, n):
        mag = rng.random(n) ** (-1.0 / self.tail)
        sign = np.where(rng.random(n) < 0.5, -1.0, 1.0)
        return self.scale * sign * mag

    @property
    def mean(self):
        return 0.0 if self.tail > 1 else None

    def central_moment(self, p):
        if p >= self.tail:
            return math.inf
        return self.scale ** p * self.tail / (self.tail - p)

    @classmethod
    def with_moment(cls, tail, p, kappa):
        """Rescaled so that ``E|X|**p == kappa``."""
        return cls(tail, (kappa * (tail - p) / tail) ** (1.0 / p))


_DISTRIBUTIONS = {
    "gaussian": Gaussian, "point": PointMass, "two_point": TwoPoint,
    "stable": StableLevy, "symmetric_pareto": SymmetricPareto,
}
_DIST_NAMES = {v: k for k, v in _DISTRIBUTIONS.items()}


def distribution_to_dict(d):
    return {"type": _DIST_NAMES[type(d)], **asdict(d)}


def distribution_from_dict(spec):
    spec = dict(spec)
    kind = spec.pop("type")
    try:
        return _DISTRIBUTIONS[kind](**spec)
    except KeyError:
        raise ValueError(f"unknown distribution type {kind!r}") from None


def dist_mean(d):
    m = getattr(d, "mean", None)
    if m is None:
        raise ValueError(f"{d!r} has no mean")
    return float(m)


def sample(spec, rng_seed, n):
    """``n`` draws from ``spec``; deterministic in ``rng_seed``."""
    rng = rng_seed if isinstance(rng_seed, np.random.Generator) \
        else np.random.default_rng(rng_seed)
    return spec.draw(rng, n)


def dirac_lower_bound_pair(sigma, epsilon):
    """``P1 = delta_0`` and ``P2 = (1 - eps) delta_0 + eps delta_{sigma/sqrt(eps)}``.

    Both have variance at most ``sigma**2``, they are eps apart in TV, and
    their means differ by ``sigma * sqrt(eps)``.
    """
    if not (0.0 < epsilon < 0.5):
        raise ValueError("epsilon must lie in (0, 0.5)")
    return PointMass(0.0), TwoPoint(0.0, sigma / math.sqrt(epsilon), 1.0 - epsilon)


# -- contamination models -----------------------------------------------------

@dataclass(frozen=True)
class Clean:
    clean: object

    def draw(self, rng, n):
        return self.clean.draw(rng, n)

    @property
    def target(self):
        return dist_mean(self.clean)


@dataclass(frozen=True)
class HuberMixture:
    """Each draw comes from ``contaminant`` with probability ``epsilon``."""

    clean: object
    contaminant: object
    epsilon: float

    def __post_init__(self):
        if not (0.0 <= self.epsilon < 1.0):
            raise ValueError("epsilon must lie in [0, 1)")

    def draw(self, rng, n):
        flag = rng.random(n) < self.epsilon
        x = self.clean.draw(rng, n)
        y = self.contaminant.draw(rng, n)
        return np.where(flag, y, x)

    @property
    def target(self):
        return dist_mean(self.clean)

    def tv_certificate(self):
        """Exact TV distance for finite-support components, else the bound."""
        if hasattr(self.clean, "as_discrete") and hasattr(self.contaminant, "as_discrete"):
            p = self.clean.as_discrete()
            q = p.mixture(self.contaminant.as_discrete(), self.epsilon)
            d = tv_distance(p, q)
            assert d <= self.epsilon + 1e-12, d
            return d
        return self.epsilon


@dataclass(frozen=True)
class FixedValue:
    c: float

    def corrupt(self, x, k):
        # overwrite the k points farthest from c
        idx = np.argsort(-np.abs(x - self.c), kind="stable")[:k]
        out = x.copy()
        out[idx] = self.c
        return out


@dataclass(frozen=True)
class MaxShift:
    """Replace the ``k`` smallest points by the batch maximum."""

    def corrupt(self, x, k):
        idx = np.argsort(x, kind="stable")[:k]
        out = x.copy()
        out[idx] = x.max()
        return out


@dataclass(frozen=True)
class Replacement:
    """Offline adversary changing ``floor(fraction * n)`` points of a batch
    after seeing it."""

    clean: object
    fraction: float
    adversary: object = field(default_factory=MaxShift)

    def __post_init__(self):
        if not (0.0 <= self.fraction < 1.0):
            raise ValueError("fraction must lie in [0, 1)")

    def n_replaced(self, n):
        return int(math.floor(self.fraction * n))

    def draw(self, rng, n):
        x = self.clean.draw(rng, n)
        return self.adversary.corrupt(x, self.n_replaced(n))

    @property
    def target(self):
        return dist_mean(self.clean)


def model_to_dict(m):
    if isinstance(m, Clean):
        return {"type": "clean", "clean": distribution_to_dict(m.clean)}
    if isinstance(m, HuberMixture):
        return {"type": "huber", "clean": distribution_to_dict(m.clean),
                "contaminant": distribution_to_dict(m.contaminant),
                "epsilon": m.epsilon}
    if isinstance(m, Replacement):
        adv = {"type": "fixed", "c": m.adversary.c} if isinstance(m.adversary, FixedValue) \
            else {"type": "max_shift"}
        return {"type": "replacement", "clean": distribution_to_dict(m.clean),
                "fraction": m.fraction, "adversary": adv}
    raise TypeError(f"unknown model {m!r}")


def model_from_dict(spec):
    kind = spec["type"]
    clean = distribution_from_dict(spec["clean"])
    if kind == "clean":
        return Clean(clean)
    if kind == "huber":
        return HuberMixture(clean, distribution_from_dict(spec["contaminant"]),
                            float(spec["epsilon"]))
    if kind == "replacement":
        adv = spec.get("adversary", {"type": "max_shift"})
        adversary = FixedValue(float(adv["c"])) if adv["type"] == "fixed" else MaxShift()
        return Replacement(clean, float(spec["fraction"]), adversary)
    raise ValueError(f"unknown model type {kind!r}")


# -- query grids --------------------------------------------------------------

def geometric_times(horizon, ratio=1.2):
    """``ceil(ratio**k)`` for k = 0, 1, ... below ``horizon``, plus ``horizon``."""
    if ratio <= 1:
        raise ValueError("ratio must exceed 1")
    times, v = set(), 1.0
    while v < horizon:
        times.add(int(math.ceil(v)))
        v *= ratio
    times.add(int(horizon))
    return np.array(sorted(t for t in times if 1 <= t <= horizon))


def parse_query(query, horizon):
    """``"all"``, ``"geom:<ratio>"`` or an explicit list of times."""
    if query is None:
        return geometric_times(horizon)
    if isinstance(query, str):
        if query == "all":
            return np.arange(1, horizon + 1)
        if query.startswith("geom:"):
            return geometric_times(horizon, float(query[5:]))
        raise ValueError(f"bad query schedule {query!r}")
    times = np.unique(np.asarray(query, dtype=int))
    if times.size == 0 or times[0] < 1 or times[-1] > horizon:
        raise ValueError("query times must lie in [1, horizon]")
    return times


# -- experiments --------------------------------------------------------------

METHODS = ("rcs", "rcs_p", "nonrobust", "trimmed")

RECORD_DTYPE = np.dtype([("rep", "i8"), ("t", "i8"), ("lower", "f8"),
                         ("upper", "f8"), ("width", "f8"), ("covered", "?")])


@dataclass
class ExperimentReport:
    """Per-time records and aggregates of a replication run.

    ``covered`` refers to the mean of the clean law. ``ever_miscovered`` is
    per replication: over every step when ``exact`` is set, otherwise over the
    query grid only (which can only undercount misses).
    """

    records: np.ndarray
    ever_miscovered: np.ndarray
    query_times: np.ndarray
    method: str
    exact: bool
    running_intersection: bool
    delta: float = 0.1

    @property
    def n_reps(self):
        return int(self.ever_miscovered.size)

    @property
    def ever_miscover_rate(self):
        return float(np.mean(self.ever_miscovered))

    def widths_at(self, t):
        r = self.records[self.records["t"] == t]
        return r["width"][np.argsort(r["rep"])]

    def width_quantiles(self, t=None, levels=None):
        t = int(self.query_times[-1]) if t is None else t
        levels = (0.5, 0.9, 1 - self.delta) if levels is None else levels
        w = self.widths_at(t)
        return {float(q): float(np.quantile(w, q, method="inverted_cdf")) for q in levels}

    def summary(self):
        return {
            "method": self.method,
            "n_reps": self.n_reps,
            "horizon": int(self.query_times[-1]),
            "exact": self.exact,
            "running_intersection": self.running_intersection,
            "ever_miscover_rate": self.ever_miscover_rate,
            "width_quantiles": {str(k): v for k, v in self.width_quantiles().items()},
        }

    def to_csv(self, path_or_file):
        """CSV with header ``rep,t,lower,upper,width,covered``."""
        own = not hasattr(path_or_file, "write")
        fh = open(path_or_file, "w", newline="") if own else path_or_file
        try:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["rep", "t", "lower", "upper", "width", "covered"])
            for r in self.records:
                w.writerow([int(r["rep"]), int(r["t"]), fmt_float(r["lower"]),
                            fmt_float(r["upper"]), fmt_float(r["width"]),
                            int(r["covered"])])
        finally:
            if own:
                fh.close()

    def write_summary(self, path):
        with open(path, "w") as fh:
            json.dump(self.summary(), fh, indent=2, sort_keys=True)
            fh.write("\n")


def fmt_float(v):
    v = float(v)
    if v == math.inf:
        return "inf"
    if v == -math.inf:
        return "-inf"
    return repr(v)


def _resolve_schedule(method, cfg, lam, lambda_exponent):
    base_cfg = cfg.with_epsilon(0.0) if method == "nonrobust" else cfg
    if lam is None:
        lam = default_lambda(cfg)
    if lambda_exponent:
        return base_cfg, PowerSchedule(lam, lambda_exponent)
    return base_cfg, float(lam)


def _one_replication(args):
    (model, method, cfg, horizon, rep, base_seed, times, lam, lambda_exponent,
     tol, exact, running) = args
    rng = replication_rng(base_seed, rep)
    data = model.draw(rng, horizon)
    mu = model.target
    rows = []
    if method == "trimmed":
        if cfg.p != 2.0:
            raise ValueError("trimmed-mean baseline needs p == 2")
        lo_run, hi_run = -math.inf, math.inf
        for t in times:
            if t < 2:
                lo, hi = -math.inf, math.inf
            else:
                lo, hi = trimmed_rci_report(data[:t], cfg.sigma, cfg.epsilon,
                                            cfg.alpha).interval()
            if running:
                lo_run, hi_run = max(lo_run, lo), min(hi_run, hi)
                lo, hi = lo_run, hi_run
            rows.append((rep, t, lo, hi, hi - lo, lo <= mu <= hi))
        ever = not all(r[-1] for r in rows)
        return rows, ever
    run_cfg, schedule = _resolve_schedule(method, cfg, lam, lambda_exponent)
    cs = RobustConfidenceSequence(run_cfg, schedule=schedule, tol=tol)
    done = 0
    for t in times:
        cs.extend(data[done:t])
        done = t
        ci = cs.interval(intersect=running)
        rows.append((rep, t, ci.lower, ci.upper, ci.width, mu in ci))
    if exact:
        # |f_t(mu)| <= G_t for every t <=> both log processes at mu stay below log(2/alpha)
        log_m, log_n = log_pair_path(data, cs.lambdas, mu, run_cfg)
        level = math.log(2.0 / run_cfg.alpha)
        ever = bool(np.any(np.maximum(log_m, log_n) > level))
    else:
        ever = not all(r[-1] for r in rows)
    return rows, ever


def run_replications(model, method, cfg, horizon, n_reps, base_seed=0,
                     query_times=None, lam=None, lambda_exponent=0.0, tol=None,
                     exact=False, running_intersection=False, delta=0.1, n_jobs=1):
    """Monte Carlo coverage and width study.

    Parameters
    ----------
    model : Clean, HuberMixture or Replacement
    method : {"rcs", "rcs_p", "nonrobust", "trimmed"}
        ``rcs`` requires ``cfg.p == 2``; ``nonrobust`` runs the same tracker
        with epsilon set to zero; ``trimmed`` is the sample-split trimmed-mean
        interval at the replacement level ``2 eps``.
    cfg : RcsConfig
    horizon, n_reps : int
    query_times : None, "all", "geom:<ratio>" or sequence of int
        Times at which intervals are recorded. Default: ratio-1.2 grid.
    lam : float, optional
        Weight scale; defaults to :func:`default_lambda`.
    lambda_exponent : float
        Use ``lam * t**lambda_exponent`` instead of a constant weight.
    exact : bool
        Check coverage at every step (not just the query grid).
    n_jobs : int
        Worker processes; results do not depend on it.
    """
    if method not in METHODS:
        raise ValueError(f"method must be one of {METHODS}")
    if method == "rcs" and cfg.p != 2.0:
        raise ValueError("method 'rcs' needs p == 2; use 'rcs_p'")
    if horizon < 1 or n_reps < 1:
        raise ValueError("horizon and n_reps must be >= 1")
    if exact and method == "trimmed":
        raise ValueError("exact coverage mode is not available for the trimmed baseline")
    times = parse_query(query_times, horizon)
    jobs = [(model, method, cfg, horizon, r, base_seed, times, lam, lambda_exponent,
             tol, exact, running_intersection) for r in range(n_reps)]
    if n_jobs == 1:
        results = [_one_replication(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=n_jobs) as ex:
            results = list(ex.map(_one_replication, jobs, chunksize=max(1, n_reps // (4 * n_jobs))))
    rows = [row for rr, _ in results for row in rr]
    records = np.array(rows, dtype=RECORD_DTYPE)
    ever = np.array([e for _, e in results], dtype=bool)
    return ExperimentReport(records, ever, times, method, exact, running_intersection, delta)


# -- JSON experiment configs --------------------------------------------------

@dataclass
class ExperimentConfig:
    """JSON-serializable description of a :func:`run_replications` call.

    Schema::

        {"model": {"type": "huber", "clean": {...}, "contaminant": {...},
                   "epsilon": 0.111},
         "method": "rcs",
         "cfg": {"p": 2, "kappa": 9, "epsilon": 0.111, "alpha": 0.05},
         "lambda": null, "lambda_exponent": 0, "tol": null,
         "horizon": 5000, "n_reps": 500, "base_seed": 0,
         "query": "geom:1.2", "exact": false, "running_intersection": false,
         "delta": 0.1}

    Distributions are ``{"type": "gaussian", "mean", "variance"}``,
    ``{"type": "point", "c"}``, ``{"type": "two_point", "a", "b", "prob_a"}``,
    ``{"type": "stable", "stability", "skew", "loc", "scale"}`` or
    ``{"type": "symmetric_pareto", "tail", "scale"}``. Models are ``clean``,
    ``huber`` or ``replacement`` (with ``fraction`` and ``adversary``
    ``{"type": "fixed", "c"}`` / ``{"type": "max_shift"}``).
    """

    model: object
    method: str
    cfg: RcsConfig
    horizon: int
    n_reps: int
    base_seed: int = 0
    query: object = None
    lam: float = None
    lambda_exponent: float = 0.0
    tol: float = None
    exact: bool = False
    running_intersection: bool = False
    delta: float = 0.1

    @classmethod
    def from_dict(cls, d):
        known = {"model", "method", "cfg", "horizon", "n_reps", "base_seed", "query",
                 "lambda", "lambda_exponent", "tol", "exact", "running_intersection",
                 "delta"}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(
            model=model_from_dict(d["model"]),
            method=d.get("method", "rcs"),
            cfg=RcsConfig(**d["cfg"]),
            horizon=int(d["horizon"]),
            n_reps=int(d["n_reps"]),
            base_seed=int(d.get("base_seed", 0)),
            query=d.get("query"),
            lam=d.get("lambda"),
            lambda_exponent=float(d.get("lambda_exponent", 0.0)),
            tol=d.get("tol"),
            exact=bool(d.get("exact", False)),
            running_intersection=bool(d.get("running_intersection", False)),
            delta=float(d.get("delta", 0.1)),
        )

    @classmethod
    def from_json(cls, path):
        with open(path) as fh:
            return cls.from_dict(json.load(fh))

    def to_dict(self):
        return {
            "model": model_to_dict(self.model), "method": self.method,
            "cfg": asdict(self.cfg), "horizon": self.horizon, "n_reps": self.n_reps,
            "base_seed": self.base_seed, "query": self.query, "lambda": self.lam,
            "lambda_exponent": self.lambda_exponent, "tol": self.tol,
            "exact": self.exact, "running_intersection": self.running_intersection,
            "delta": self.delta,
        }

    def run(self, method=None, n_jobs=1):
        return run_replications(
            self.model, method or self.method, self.cfg, self.horizon, self.n_reps,
            base_seed=self.base_seed, query_times=self.query, lam=self.lam,
            lambda_exponent=self.lambda_exponent, tol=self.tol, exact=self.exact,
            running_intersection=self.running_intersection, delta=self.delta,
            n_jobs=n_jobs)
