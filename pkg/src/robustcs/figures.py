"""Data behind the three experiment figures, as rows ready for CSV.

Every generator is a deterministic function of its seed. Rows are
``(t, series, lower, upper, width)``.

fig2
    N(0, 9) with a 1/9 chance of a 0.75-stable (skew 0.5, loc 0) draw;
    robust CS (sigma^2 = 9, eps = 1/9, lambda = 1/18) against the eps = 0
    Catoni CS with the usual decaying weights.
fig3
    Same clean law, contaminant 0.3-stable (skew 0.5, loc 1000); robust CS
    with ``lambda_t = 0.5 sqrt(eps) / sigma * t**u`` for four exponents.
fig4
    sigma^2 = 1/eps = 36 with the fig3 contaminant; robust CS widths against
    the trimmed-mean interval (only where it is defined).
"""
import csv
import math

import numpy as np

from .baselines import trimmed_rci_report
from .confseq import PowerSchedule, RobustConfidenceSequence
from .martingales import RcsConfig
from .simulate import Gaussian, HuberMixture, StableLevy, fmt_float, geometric_times, replication_rng

FIGURE_SEEDS = {"fig2": 2023, "fig3": 3023, "fig4": 4023}
FIG3_EXPONENTS = (-0.5, -0.25, 0.0, 0.25)


def fig2_model():
    return HuberMixture(Gaussian(0.0, 9.0), StableLevy(0.75, 0.5, 0.0, 1.0), 1 / 9)


def fig3_model(sigma2=9.0, epsilon=1 / 9):
    return HuberMixture(Gaussian(0.0, sigma2), StableLevy(0.3, 0.5, 1000.0, 1.0), epsilon)


def catoni_schedule(sigma2, alpha):
    """Decaying weights ``sqrt(2 log(2/alpha) / (sigma2 t log(1 + t)))`` of the
    non-robust Catoni CS."""
    c = 2.0 * math.log(2.0 / alpha) / sigma2

    def schedule(t):
        return math.sqrt(c / (t * math.log1p(t)))
    return schedule


def _track(cs, data, times, name):
    rows, done = [], 0
    for t in times:
        cs.extend(data[done:t])
        done = t
        ci = cs.interval()
        rows.append((int(t), name, ci.lower, ci.upper, ci.width))
    return rows


def fig2(horizon=10_000, seed=None, grid_ratio=1.02):
    seed = FIGURE_SEEDS["fig2"] if seed is None else seed
    cfg = RcsConfig.from_variance(9.0, epsilon=1 / 9, alpha=0.05)
    data = fig2_model().draw(replication_rng(seed, 0), horizon)
    times = geometric_times(horizon, grid_ratio)
    rows = _track(RobustConfidenceSequence(cfg, schedule=1 / 18), data, times, "robust")
    nonrobust = RobustConfidenceSequence(cfg.with_epsilon(0.0),
                                         schedule=catoni_schedule(9.0, 0.05))
    rows += _track(nonrobust, data, times, "nonrobust")
    return rows


def fig3(horizon=100_000, seed=None, grid_ratio=1.05):
    seed = FIGURE_SEEDS["fig3"] if seed is None else seed
    cfg = RcsConfig.from_variance(9.0, epsilon=1 / 9, alpha=0.05)
    data = fig3_model().draw(replication_rng(seed, 0), horizon)
    times = geometric_times(horizon, grid_ratio)
    scale = 0.5 * math.sqrt(cfg.epsilon) / cfg.sigma
    rows = []
    for u in FIG3_EXPONENTS:
        cs = RobustConfidenceSequence(cfg, schedule=PowerSchedule(scale, u))
        rows += _track(cs, data, times, f"u={u:g}")
    return rows


def fig4(horizon=20_000, seed=None, grid_ratio=1.05):
    seed = FIGURE_SEEDS["fig4"] if seed is None else seed
    eps = 1 / 36
    cfg = RcsConfig.from_variance(36.0, epsilon=eps, alpha=0.05)
    data = fig3_model(36.0, eps).draw(replication_rng(seed, 0), horizon)
    times = geometric_times(horizon, grid_ratio)
    rows = _track(RobustConfidenceSequence(cfg), data, times, "robust")
    for t in times:
        if t < 2:
            continue
        rep = trimmed_rci_report(data[:t], cfg.sigma, eps, cfg.alpha)
        if rep.defined:
            lo, hi = rep.interval()
            rows.append((int(t), "trimmed", lo, hi, hi - lo))
    return rows


FIGURES = {"fig2": fig2, "fig3": fig3, "fig4": fig4}


def write_rows(rows, path_or_file):
    own = not hasattr(path_or_file, "write")
    fh = open(path_or_file, "w", newline="") if own else path_or_file
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t", "series", "lower", "upper", "width"])
        for t, name, lo, hi, width in rows:
            w.writerow([t, name, fmt_float(lo), fmt_float(hi), fmt_float(width)])
    finally:
        if own:
            fh.close()


def series(rows, name):
    """``(t, lower, upper, width)`` arrays of one series."""
    sel = [r for r in rows if r[1] == name]
    t = np.array([r[0] for r in sel])
    return t, np.array([r[2] for r in sel]), np.array([r[3] for r in sel]), \
        np.array([r[4] for r in sel])
