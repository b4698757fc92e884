"""Weighted max-min allocation and weak Pareto boundary tools for SI utilities."""

from .errors import EvaluationError, ModelBuildError, PreconditionError, UsageError
from .interference import (
    AffineModel,
    CheckReport,
    MonotoneNorm,
    RestrictedModel,
    WeightedModel,
    check_monotone_norm,
    check_standard_interference,
    eval_utilities,
    load_affine_model,
    norm_eval,
    scale_by_weights,
)
from .solver import (
    MaxMinSolution,
    SolverOptions,
    extract_weights,
    feasibility_certificate,
    normalized_map,
    solve_weighted_maxmin,
)
from .pareto import (
    BoundaryCertificate,
    BoundarySample,
    Dominance,
    certify_boundary,
    dominance_compare,
    find_dominating_point,
    sample_boundary,
)

__version__ = "0.1.0"
