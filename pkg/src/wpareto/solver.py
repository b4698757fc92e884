"""Weighted max-min utility allocation by normalized fixed-point iteration.

For weights ``ω`` the mapping ``T(p) = (ω_k f_k(p))_k`` is standard, and the
normalized map ``p ↦ p̄ T(p) / ‖T(p)‖`` has a unique fixed point ``p*`` that
maximizes ``min_k u_k(p) / ω_k`` over ``‖p‖ ≤ p̄``.  The optimal level is
``c* = p̄ / ‖T(p*)‖`` and every user attains ``u_k(p*) = c* ω_k``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import PreconditionError, UsageError
from .interference import (
    MonotoneNorm,
    as_power_vector,
    as_weights,
    eval_utilities,
    scale_by_weights,
)


@dataclass
class SolverOptions:
    tol: float = 1e-12
    max_iter: int = 10_000
    p_init: Optional[np.ndarray] = None

    def __post_init__(self):
        if not self.tol > 0:
            raise UsageError(f"tol must be positive, got {self.tol}")
        if int(self.max_iter) < 1:
            raise UsageError(f"max_iter must be >= 1, got {self.max_iter}")
        self.max_iter = int(self.max_iter)
        if self.p_init is not None:
            self.p_init = as_power_vector(self.p_init)


@dataclass
class MaxMinSolution:
    p_star: np.ndarray
    c_star: float
    utilities: np.ndarray
    weights: np.ndarray
    iterations: int
    converged: bool
    trace: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "p_star": self.p_star.tolist(),
            "c_star": float(self.c_star),
            "utilities": self.utilities.tolist(),
            "weights": self.weights.tolist(),
            "iterations": self.iterations,
            "converged": self.converged,
            "residual_trace": [[n, float(r)] for n, r in self.trace],
        }


def normalized_map(model_T, norm: MonotoneNorm, p) -> np.ndarray:
    """Return ``(p̄ / ‖T(p)‖) T(p)``."""
    t = model_T(p)
    return t * (norm.budget / norm(t))


def _check_norm_dim(norm: MonotoneNorm, K: int):
    if norm.dim is not None and norm.dim != K:
        raise UsageError(f"norm has dimension {norm.dim}, model has K={K}")


def default_start(norm: MonotoneNorm, K: int) -> np.ndarray:
    """The uniform vector ``(p̄/‖1‖) 1`` on the budget surface."""
    ones = np.ones(K)
    return ones * (norm.budget / norm(ones))


def solve_weighted_maxmin(model, weights, norm: MonotoneNorm,
                          opts: Optional[SolverOptions] = None) -> MaxMinSolution:
    """Maximize ``min_k u_k(p)/ω_k`` subject to ``‖p‖ ≤ p̄``.

    Iterates the normalized map from ``opts.p_init`` (default: uniform vector
    on the budget surface) until ``‖p_{n+1} - p_n‖_∞ / p̄ ≤ tol``.  Hitting
    ``max_iter`` first returns the last iterate with ``converged=False``.
    """
    opts = opts or SolverOptions()
    K = model.K
    _check_norm_dim(norm, K)
    weights = as_weights(weights, K)
    T = scale_by_weights(model, weights)

    p = default_start(norm, K) if opts.p_init is None else as_power_vector(opts.p_init, K)
    trace = []
    converged = False
    n = 0
    for n in range(1, opts.max_iter + 1):
        p_next = normalized_map(T, norm, p)
        residual = float(np.max(np.abs(p_next - p))) / norm.budget
        trace.append((n, residual))
        p = p_next
        if residual <= opts.tol:
            converged = True
            break

    c_star = norm.budget / norm(T(p))
    return MaxMinSolution(
        p_star=p,
        c_star=float(c_star),
        utilities=eval_utilities(model, p),
        weights=weights,
        iterations=n,
        converged=converged,
        trace=trace,
    )


def extract_weights(model, p_star) -> np.ndarray:
    """Weights ``ω_k = u_k(p*)`` for which ``p*`` is max-min optimal.

    Only defined for strictly positive ``p*``; points with idle users go
    through the reduced network (see :mod:`wpareto.pareto`).
    """
    p = as_power_vector(p_star, model.K)
    if p.ndim != 1:
        raise UsageError("extract_weights takes a single power vector")
    if np.any(p <= 0):
        zeros = np.flatnonzero(p <= 0).tolist()
        raise PreconditionError(
            f"p has zero entries at users {zeros}; weights are only defined for strictly "
            "positive powers, use the reduced network of the active users instead"
        )
    return eval_utilities(model, p)


def feasibility_certificate(model, weights, p, c: float) -> bool:
    """True iff ``p ≥ c T(p)`` coordinate-wise, i.e. ``u_k(p) ≥ c ω_k`` for all k."""
    if c < 0:
        raise UsageError(f"c must be nonnegative, got {c}")
    p = as_power_vector(p, model.K)
    T = scale_by_weights(model, weights)
    return bool(np.all(p >= c * T(p)))
