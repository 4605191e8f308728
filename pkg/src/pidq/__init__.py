"""Partial information decomposition for finite discrete distributions.

Decomposes the information two modalities X1, X2 carry about a label Y into
redundancy, two uniqueness terms and synergy, bounds synergy from pairwise
marginals alone, discretizes raw features, and ranks candidate models by
the interactions their predictions capture.
"""

import logging

from .bounds import (
    DisagreementConfig,
    PerfBounds,
    SynergyBounds,
    bayes_classifier,
    cl_suboptimality_bound,
    disagreement,
    min_conditional_mi,
    performance_bounds,
    performance_range,
    synergy_bounds,
    synergy_lower_redundancy,
    synergy_lower_uniqueness,
    synergy_upper,
)
from .coupling import Coupling, greedy_coupling
from .discretize import (
    DiscretizeConfig,
    SampleTable,
    auto_bin_count,
    bin_scalar_features,
    discretize_table,
    empirical_joint,
    kmeans_discretize,
)
from .dist import (
    Cardinalities,
    JointDist,
    PairwiseMarginals,
    PIDResult,
    co_information,
    conditional_mutual_info,
    entropy,
    marginalize,
    mutual_info,
    pairwise_marginals,
)
from .errors import (
    ArgumentError,
    InfeasibleError,
    MissingMarginalError,
    PIDQError,
    StaleSolutionError,
    ValidationError,
)
from .selection import (
    AgreementScore,
    ModelLibrary,
    NormalizedPID,
    agreement,
    dataset_similarity,
    model_pid,
    normalize_pid,
    select_models,
    synthetic_library,
)
from .solver import SolverConfig, compute_pid, pid, pid_from_samples, solve_q_star

logging.getLogger(__name__).addHandler(logging.NullHandler())

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_") and name != "logging"]
