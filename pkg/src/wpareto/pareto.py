"""Weak Pareto boundary membership, dominating points and boundary sampling.

Under a monotone-norm budget the utilities of ``p`` lie on the weak Pareto
boundary exactly when ``‖p‖ = p̄``.  Interior points are improved for every
user by scaling up to the budget and giving idle users a small power.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import UsageError
from .interference import MonotoneNorm, RestrictedModel, as_power_vector, eval_utilities
from .solver import SolverOptions, extract_weights, solve_weighted_maxmin

BOUNDARY_TOL = 1e-9
PERTURBATION_SCHEDULE = tuple(10.0 ** -e for e in range(2, 9))


class Dominance(enum.Enum):
    FIRST = "FirstStrictlyDominates"
    SECOND = "SecondStrictlyDominates"
    NEITHER = "Neither"


def dominance_compare(u1, u2) -> Dominance:
    """Strict coordinate-wise comparison of two utility profiles."""
    u1 = np.asarray(u1, dtype=float)
    u2 = np.asarray(u2, dtype=float)
    if u1.shape != u2.shape or u1.ndim != 1:
        raise UsageError(f"utility profiles must have equal length, got {u1.shape} and {u2.shape}")
    if np.all(u1 > u2):
        return Dominance.FIRST
    if np.all(u2 > u1):
        return Dominance.SECOND
    return Dominance.NEITHER


@dataclass
class BoundarySample:
    p: np.ndarray
    u: np.ndarray


@dataclass
class BoundaryCertificate:
    on_boundary: bool
    norm_value: float
    budget: float
    solver_crosscheck: Optional[dict] = None
    dominator: Optional[np.ndarray] = None

    def to_dict(self) -> dict:
        cc = None
        if self.solver_crosscheck is not None:
            cc = {k: (v.tolist() if isinstance(v, np.ndarray) else v)
                  for k, v in self.solver_crosscheck.items()}
        return {
            "on_boundary": self.on_boundary,
            "norm_value": self.norm_value,
            "budget": self.budget,
            "solver_crosscheck": cc,
            "dominator": None if self.dominator is None else self.dominator.tolist(),
        }


def _on_boundary(norm: MonotoneNorm, p, tol: float) -> bool:
    return abs(norm(p) - norm.budget) <= norm.budget * tol


def _check_in_set(norm: MonotoneNorm, p, tol: float):
    if norm(p) > norm.budget * (1.0 + tol):
        raise UsageError(f"p is outside the constraint set: ‖p‖ = {norm(p)!r} > {norm.budget!r}")


def find_dominating_point(model, norm: MonotoneNorm, p, perturbation: Optional[float] = None,
                          tol: float = BOUNDARY_TOL) -> Optional[np.ndarray]:
    """A feasible, strictly positive point whose utilities beat ``u(p)`` for every user.

    Returns None when ``p`` is on the boundary (no such point exists) or when
    strict dominance cannot be verified at the tried perturbation sizes.  With
    ``perturbation=None`` the sizes 1e-2, 1e-3, ..., 1e-8 are tried in order.
    """
    p = as_power_vector(p, model.K)
    if norm(p) >= norm.budget * (1.0 - tol):
        return None
    u = eval_utilities(model, p)
    ones = np.ones(model.K)
    filler = norm.budget / norm(ones)
    if not np.any(p > 0):
        q = ones * filler
        return q if np.all(eval_utilities(model, q) > u) else None

    scaled = p * (norm.budget / norm(p))
    idle = p == 0
    schedule = PERTURBATION_SCHEDULE if perturbation is None else (perturbation,)
    for eps in schedule:
        if not eps > 0:
            raise UsageError(f"perturbation must be positive, got {eps}")
        x = scaled.copy()
        x[idle] = eps * filler
        y = norm.normalize(x)
        if norm(y) <= norm.budget * (1.0 + tol) and np.all(eval_utilities(model, y) > u):
            return y
    return None


def certify_boundary(model, norm: MonotoneNorm, p, tol: float = BOUNDARY_TOL,
                     crosscheck: bool = True,
                     solver_opts: Optional[SolverOptions] = None) -> BoundaryCertificate:
    """Decide whether ``u(p)`` is on the weak Pareto boundary via ``‖p‖ = p̄``.

    The solver crosscheck re-solves the max-min problem with weights
    ``u(p)`` on the active users; on the boundary it must return ``c* = 1``
    and recover ``p``.  Interior points get a verified dominator attached.
    """
    p = as_power_vector(p, model.K)
    if p.ndim != 1:
        raise UsageError("certify_boundary takes a single power vector")
    _check_in_set(norm, p, tol)
    value = norm(p)
    on_boundary = _on_boundary(norm, p, tol)
    cert = BoundaryCertificate(on_boundary, float(value), norm.budget)

    active = np.flatnonzero(p > 0)
    if crosscheck and active.size:
        if active.size == model.K:
            sub_model, sub_norm, sub_p = model, norm, p
        else:
            sub_model = RestrictedModel(model, active)
            sub_norm = norm.restrict(active)
            sub_p = p[active]
        weights = extract_weights(sub_model, sub_p)
        sol = solve_weighted_maxmin(sub_model, weights, sub_norm, solver_opts)
        cert.solver_crosscheck = {
            "c_star": sol.c_star,
            "recovered_p": sol.p_star,
            "active_users": active.tolist(),
            "reduced_network": bool(active.size < model.K),
            "converged": sol.converged,
        }
    if not on_boundary:
        cert.dominator = find_dominating_point(model, norm, p, tol=tol)
    return cert


def sample_boundary(model, norm: MonotoneNorm, n: int, rng_seed=0,
                    low: float = 1e-4) -> list[BoundarySample]:
    """Draw ``n`` power vectors with ``‖p‖ = p̄`` and their utilities.

    The first samples are the uniform vector followed by the K single-user
    points; the rest use directions with log-uniform coordinates in
    ``[low, 1]``.
    """
    if n < 1:
        raise UsageError("n must be >= 1")
    K = model.K
    anchors = [np.ones(K)] + [np.eye(K)[k] for k in range(K)]
    rng = np.random.default_rng(rng_seed)
    dirs = anchors[:n]
    if n > len(dirs):
        extra = np.exp(rng.uniform(math.log(low), 0.0, size=(n - len(dirs), K)))
        dirs = dirs + list(extra)
    P = norm.normalize(np.array(dirs))
    U = eval_utilities(model, P)
    return [BoundarySample(P[i], U[i]) for i in range(n)]


def random_feasible_candidates(norm: MonotoneNorm, K: int, n: int, rng,
                               low: float = 1e-6) -> np.ndarray:
    """``n`` points log-uniform in ``[low·p̄, p̄]^K`` that satisfy ``‖p‖ ≤ p̄``."""
    out = []
    have = 0
    lo, hi = math.log(low * norm.budget), math.log(norm.budget)
    while have < n:
        batch = np.exp(rng.uniform(lo, hi, size=(max(n, 1024), K)))
        batch = batch[np.asarray(norm(batch)) <= norm.budget]
        out.append(batch)
        have += len(batch)
    return np.concatenate(out)[:n]


def brute_force_dominator(model, norm: MonotoneNorm, p, n_candidates: int = 10_000,
                          rng_seed=0) -> Optional[np.ndarray]:
    """Search random feasible points for one that strictly dominates ``u(p)``."""
    rng = np.random.default_rng(rng_seed)
    u = eval_utilities(model, as_power_vector(p, model.K))
    cands = random_feasible_candidates(norm, model.K, n_candidates, rng)
    hits = np.flatnonzero(np.all(eval_utilities(model, cands) > u, axis=1))
    return cands[hits[0]] if hits.size else None
