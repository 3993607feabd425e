"""Huber-robust confidence sequences for the mean.

Anytime-valid intervals for the mean of a law with bounded p-th central
moment (1 < p <= 2) when an epsilon fraction of the data distribution may be
arbitrarily corrupted, plus robust sequential tests, a robust betting
process, baselines and a Monte Carlo harness.
"""
from .baselines import (
    TrimmedMeanReport,
    nonrobust_cs,
    rrci_to_rci_params,
    trimmed_mean_estimate,
    trimmed_mean_half_width,
    trimmed_mean_report,
    trimmed_rci_report,
)
from .confseq import (
    ConfidenceInterval,
    ConstantSchedule,
    PowerSchedule,
    RobustConfidenceSequence,
    breakdown_feasible,
    default_lambda,
    finite_onset,
    first_finite_time,
)
from .influence import exp_phi_p, phi, phi_p
from .martingales import (
    BettingState,
    DiscreteDistribution,
    RcsConfig,
    SupermartingalePair,
    betting_step,
    exact_expected_factor,
    log_denominator,
    log_pair_path,
    log_wealth_path,
    step_pair,
    tv_distance,
)
from .seqtest import IntervalTest, TestState, growth_certificate, one_sided_step, two_sided_step
from .simulate import (
    Clean,
    ExperimentConfig,
    ExperimentReport,
    Gaussian,
    HuberMixture,
    PointMass,
    Replacement,
    StableLevy,
    SymmetricPareto,
    TwoPoint,
    dirac_lower_bound_pair,
    run_replications,
    sample,
)

__version__ = "0.1.0"
