"""Poisson-type approximations of sums of 1-dependent integer variables.

Modules
-------
measures
    Signed measures on the integers and the six approximating families.
models
    1-dependent sums built from a hidden Bernoulli chain, with exact laws.
moments
    Factorial and mixed moments, remainder terms and hypothesis checks.
metrics
    Non-uniform Kolmogorov, non-uniform local, total variation, Wasserstein.
harness
    Bound evaluation over sweeps and empirical constant estimates.
"""

from .errors import (
    DivergenceError,
    GridTooSmallError,
    NonConvergenceError,
    ParameterDomainError,
    ResourceLimitError,
)
from .measures import FamilyParams, SignedMeasure, build_family, convolve, invert_cf
from .models import (
    brute_force_sum,
    exact_sum_distribution,
    k1k2_events_model,
    make_model,
    poisson_binomial_model,
    two_runs_model,
)
from .moments import check_conditions, remainders, summarize
from .metrics import (
    kolmogorov,
    nonuniform_kolmogorov,
    nonuniform_local,
    total_variation,
    wasserstein_norm,
)
from .harness import ExperimentConfig, estimate_constant, evaluate_bounds, sharp_constant_experiment

__version__ = "0.1.0"
