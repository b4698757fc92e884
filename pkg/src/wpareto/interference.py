"""Power vectors, monotone norms, standard interference models and utilities.

Models are callables mapping a power vector ``p`` (shape ``(K,)``, or a batch
of shape ``(M, K)``) to the positive vector ``(f_1(p), ..., f_K(p))`` of the
same shape.  The utility of user ``k`` is ``u_k(p) = p_k / f_k(p)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import UsageError

# relative margin used when testing inequalities that are strict in exact arithmetic
STRICT_MARGIN = 1e-12

NORM_KINDS = ("l1", "linf", "wl1", "wlinf")


def as_power_vector(p, K: Optional[int] = None) -> np.ndarray:
    """Validate and return ``p`` as a float array with nonnegative entries."""
    arr = np.asarray(p, dtype=float)
    if arr.ndim not in (1, 2) or arr.shape[-1] < 1:
        raise UsageError(f"power vector must be 1-D or a 2-D batch, got shape {arr.shape}")
    if K is not None and arr.shape[-1] != K:
        raise UsageError(f"power vector has {arr.shape[-1]} entries, model has K={K}")
    if not np.all(np.isfinite(arr)):
        raise UsageError("power vector has non-finite entries")
    if np.any(arr < 0):
        raise UsageError("power vector has negative entries")
    return arr


def as_weights(w, K: Optional[int] = None) -> np.ndarray:
    arr = np.asarray(w, dtype=float)
    if arr.ndim != 1:
        raise UsageError(f"weight vector must be 1-D, got shape {arr.shape}")
    if K is not None and arr.shape[0] != K:
        raise UsageError(f"weight vector has {arr.shape[0]} entries, expected {K}")
    if not np.all(np.isfinite(arr)) or np.any(arr <= 0):
        raise UsageError("weights must be strictly positive and finite")
    return arr


@dataclass(frozen=True, eq=False)
class MonotoneNorm:
    """A monotone norm together with the budget ``p̄`` of the set ``{‖p‖ ≤ p̄}``.

    ``kind`` is one of ``l1``, ``linf``, ``wl1`` (``Σ w_k |x_k|``) or
    ``wlinf`` (``max_k w_k |x_k|``).  Weighted kinds need positive ``weights``.
    """

    kind: str
    budget: float
    weights: Optional[np.ndarray] = None

    def __post_init__(self):
        kind = self.kind.lower()
        if kind not in NORM_KINDS:
            raise UsageError(f"unknown norm kind {self.kind!r}; expected one of {NORM_KINDS}")
        object.__setattr__(self, "kind", kind)
        if not (math.isfinite(self.budget) and self.budget > 0):
            raise UsageError(f"budget must be positive, got {self.budget}")
        object.__setattr__(self, "budget", float(self.budget))
        if kind.startswith("w"):
            if self.weights is None:
                raise UsageError(f"norm kind {kind!r} requires weights")
            object.__setattr__(self, "weights", as_weights(self.weights))
        elif self.weights is not None:
            raise UsageError(f"norm kind {kind!r} takes no weights")

    @property
    def dim(self) -> Optional[int]:
        return None if self.weights is None else len(self.weights)

    def __call__(self, x) -> np.ndarray | float:
        x = np.asarray(x, dtype=float)
        if self.weights is not None:
            if x.shape[-1] != len(self.weights):
                raise UsageError(
                    f"vector has {x.shape[-1]} entries, norm weights have {len(self.weights)}"
                )
            x = x * self.weights
        a = np.abs(x)
        out = a.sum(axis=-1) if self.kind in ("l1", "wl1") else a.max(axis=-1)
        return float(out) if np.ndim(out) == 0 else out

    def normalize(self, x) -> np.ndarray:
        """Rescale ``x`` so that ``‖x‖ = p̄``."""
        x = np.asarray(x, dtype=float)
        n = np.asarray(self(x))
        if np.any(n <= 0):
            raise UsageError("cannot normalize a zero vector")
        return x * (self.budget / n)[..., None] if x.ndim > 1 else x * (self.budget / n)

    def restrict(self, keep: Sequence[int]) -> "MonotoneNorm":
        """The same norm kind on the coordinates ``keep`` (reduced network)."""
        w = None if self.weights is None else self.weights[np.asarray(keep)]
        return MonotoneNorm(self.kind, self.budget, w)

    def __repr__(self):
        w = "" if self.weights is None else f", weights={self.weights.tolist()}"
        return f"MonotoneNorm({self.kind!r}, budget={self.budget}{w})"


def norm_eval(norm: MonotoneNorm, x) -> float:
    return norm(x)


class AffineModel:
    """Affine interference ``f(p) = F p + σ`` with ``F ≥ 0`` and ``σ > 0``.

    ``σ`` may be given with zero entries (useful as a negative test case);
    such a model is not standard and the checker will say so.
    """

    def __init__(self, F, sigma):
        F = np.atleast_2d(np.asarray(F, dtype=float))
        sigma = np.asarray(sigma, dtype=float).ravel()
        K = sigma.shape[0]
        if F.shape != (K, K):
            raise UsageError(f"F has shape {F.shape}, expected ({K}, {K})")
        if np.any(F < 0) or np.any(sigma < 0):
            raise UsageError("F and sigma must be nonnegative")
        self.F = F
        self.sigma = sigma
        self.K = K

    def __call__(self, p) -> np.ndarray:
        p = as_power_vector(p, self.K)
        return p @ self.F.T + self.sigma

    def __repr__(self):
        return f"AffineModel(K={self.K})"


class WeightedModel:
    """The mapping ``p ↦ (ω_1 f_1(p), ..., ω_K f_K(p))``."""

    def __init__(self, base, weights):
        self.base = base
        self.K = base.K
        self.weights = as_weights(weights, self.K)

    def __call__(self, p) -> np.ndarray:
        return self.weights * self.base(p)


class RestrictedModel:
    """Reduced network: users outside ``keep`` are removed (their power is 0)."""

    def __init__(self, base, keep: Sequence[int]):
        keep = np.asarray(sorted(set(int(k) for k in keep)), dtype=int)
        if keep.size == 0 or keep[0] < 0 or keep[-1] >= base.K:
            raise UsageError(f"invalid user subset {keep.tolist()} for K={base.K}")
        self.base = base
        self.keep = keep
        self.K = len(keep)

    def embed(self, q) -> np.ndarray:
        q = as_power_vector(q, self.K)
        p = np.zeros(q.shape[:-1] + (self.base.K,))
        p[..., self.keep] = q
        return p

    def __call__(self, q) -> np.ndarray:
        return self.base(self.embed(q))[..., self.keep]


def scale_by_weights(model, weights) -> WeightedModel:
    return WeightedModel(model, weights)


def eval_utilities(model, p) -> np.ndarray:
    """Return ``u_k(p) = p_k / f_k(p)`` for every user."""
    p = as_power_vector(p, model.K)
    return p / model(p)


def load_affine_model(path) -> AffineModel:
    """Read an affine model: ``K``, then K rows of ``F``, then one row of ``σ``."""
    rows = []
    for raw in Path(path).read_text().splitlines():
        line = raw.split("#", 1)[0].strip()
        if line:
            rows.append(line.split())
    if not rows:
        raise UsageError(f"{path}: empty model file")
    try:
        K = int(rows[0][0])
        if len(rows[0]) != 1 or K < 1:
            raise ValueError
    except ValueError:
        raise UsageError(f"{path}: first line must be a positive integer K") from None
    if len(rows) != K + 2:
        raise UsageError(f"{path}: expected {K + 2} non-comment lines, got {len(rows)}")
    try:
        F = np.array([[float(v) for v in r] for r in rows[1 : K + 1]])
        sigma = np.array([float(v) for v in rows[K + 1]])
    except ValueError as exc:
        raise UsageError(f"{path}: {exc}") from None
    if F.shape != (K, K) or sigma.shape != (K,):
        raise UsageError(f"{path}: F must be {K}x{K} and sigma must have {K} entries")
    if np.any(sigma <= 0):
        raise UsageError(f"{path}: sigma entries must be positive")
    return AffineModel(F, sigma)


# --------------------------------------------------------------------------
# sampled checks


@dataclass
class CheckReport:
    passed: bool
    trials: int
    violated: Optional[str] = None
    counterexample: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "trials": self.trials,
            "violated": self.violated,
            "counterexample": _jsonable(self.counterexample),
        }


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def sample_powers(rng, n: int, K: int, low=1e-6, high=1e3, zero_prob=0.2) -> np.ndarray:
    """Log-uniform powers in ``[low, high]`` with coordinates zeroed at random."""
    p = np.exp(rng.uniform(math.log(low), math.log(high), size=(n, K)))
    p[rng.random((n, K)) < zero_prob] = 0.0
    return p


def _fail(trials, name, **witness):
    return CheckReport(False, trials, name, witness)


def check_standard_interference(model, trials: int = 1000, scale_range=(1.0, 10.0),
                                rng_seed=0, margin: float = STRICT_MARGIN) -> CheckReport:
    """Sampled test of positivity, monotonicity and strict scalability.

    Pairs ``x ≥ y ≥ 0`` and factors ``α ∈ (lo, hi]`` are drawn at random.  A
    pass is evidence only.  Differences below ``margin`` (relative) are treated
    as floating-point ties and not reported.
    """
    if trials < 1:
        raise UsageError("trials must be >= 1")
    lo, hi = map(float, scale_range)
    if not (1.0 <= lo < hi):
        raise UsageError(f"scale_range must lie in (1, inf), got {scale_range}")
    rng = np.random.default_rng(rng_seed)
    K = model.K
    y = sample_powers(rng, trials, K)
    y[0] = 0.0
    x = y + sample_powers(rng, trials, K, zero_prob=0.3)
    alpha = lo + (hi - lo) * (1.0 - rng.random(trials))

    fy, fx = model(y), model(x)
    fax = model(alpha[:, None] * x)
    for name, pts, vals in (("positivity", y, fy), ("positivity", x, fx)):
        bad = np.argwhere(~(vals > 0))
        if bad.size:
            i, k = bad[0]
            return _fail(trials, name, p=pts[i], coordinate=int(k), value=vals[i, k])

    bad = np.argwhere(fx < fy - margin * np.abs(fy))
    if bad.size:
        i, k = bad[0]
        return _fail(trials, "monotonicity", x=x[i], y=y[i], coordinate=int(k),
                     f_x=fx[i, k], f_y=fy[i, k])

    scaled = alpha[:, None] * fx
    bad = np.argwhere(fax > scaled * (1.0 + margin))
    if bad.size:
        i, k = bad[0]
        return _fail(trials, "scalability", x=x[i], alpha=alpha[i], coordinate=int(k),
                     alpha_f_x=scaled[i, k], f_alpha_x=fax[i, k])
    return CheckReport(True, trials)


def check_utility_properties(model, trials: int = 1000, rng_seed=0,
                             margin: float = STRICT_MARGIN) -> CheckReport:
    """Sampled test of the utility properties implied by SI interference.

    Checks ``u_k(p) = 0 ⇔ p_k = 0`` (and ``u > 0`` for positive ``p``),
    ``u_k(αp) > u_k(p)`` for ``α ∈ (1, 10]`` when ``p_k > 0``, and
    ``u_k(p) ≤ u_k(x)`` whenever ``p ≥ x`` and ``p_k = x_k``.
    """
    rng = np.random.default_rng(rng_seed)
    K = model.K
    p = sample_powers(rng, trials, K)
    p[0] = 0.0
    u = eval_utilities(model, p)
    bad = np.argwhere((u == 0) != (p == 0))
    if bad.size:
        i, k = bad[0]
        return _fail(trials, "zero-iff-zero-power", p=p[i], coordinate=int(k), utility=u[i, k])

    alpha = 1.0 + 9.0 * (1.0 - rng.random(trials))
    ua = eval_utilities(model, alpha[:, None] * p)
    bad = np.argwhere((p > 0) & (ua < u * (1.0 - margin)))
    if bad.size:
        i, k = bad[0]
        return _fail(trials, "scaling-increases-utility", p=p[i], alpha=alpha[i],
                     coordinate=int(k), u_p=u[i, k], u_alpha_p=ua[i, k])

    # p >= x with p_k = x_k, one k per sample
    x = sample_powers(rng, trials, K)
    ks = rng.integers(0, K, size=trials)
    bump = sample_powers(rng, trials, K, zero_prob=0.3)
    bump[np.arange(trials), ks] = 0.0
    pp = x + bump
    ux = eval_utilities(model, x)[np.arange(trials), ks]
    up = eval_utilities(model, pp)[np.arange(trials), ks]
    bad = np.flatnonzero(up > ux + margin * np.abs(ux))
    if bad.size:
        i = bad[0]
        return _fail(trials, "interference-lowers-utility", p=pp[i], x=x[i],
                     coordinate=int(ks[i]), u_p=up[i], u_x=ux[i])
    return CheckReport(True, trials)


def check_monotone_norm(norm: Callable, trials: int = 1000, rng_seed=0, dim: Optional[int] = None,
                        tol: float = 1e-12) -> CheckReport:
    """Sampled test of the norm axioms plus monotonicity on the nonnegative orthant.

    ``norm`` is any callable on 1-D arrays; ``dim`` defaults to the norm's own
    dimension (weighted kinds) or 4.
    """
    if trials < 1:
        raise UsageError("trials must be >= 1")
    K = dim or getattr(norm, "dim", None) or 4
    rng = np.random.default_rng(rng_seed)

    def nv(v):
        return float(norm(v))

    if abs(nv(np.zeros(K))) > 0:
        return _fail(trials, "definiteness", x=np.zeros(K), value=nv(np.zeros(K)))
    specials = [np.ones(K)] + [np.eye(K)[k] for k in range(K)]
    for t in range(trials):
        x = specials[t] if t < len(specials) else rng.standard_normal(K) * np.exp(rng.uniform(-5, 5))
        y = rng.standard_normal(K) * np.exp(rng.uniform(-5, 5))
        a = rng.standard_normal() * 10.0
        nx, ny = nv(x), nv(y)
        if not nx > 0:
            return _fail(trials, "definiteness", x=x, value=nx)
        if abs(nv(a * x) - abs(a) * nx) > tol * max(1.0, abs(a) * nx):
            return _fail(trials, "homogeneity", x=x, scale=a, lhs=nv(a * x), rhs=abs(a) * nx)
        if nv(x + y) > (nx + ny) * (1.0 + tol):
            return _fail(trials, "triangle", x=x, y=y, lhs=nv(x + y), rhs=nx + ny)
        lo = np.abs(x)
        hi = lo + np.abs(y) * (rng.random(K) < 0.5)
        if nv(lo) > nv(hi) * (1.0 + tol):
            return _fail(trials, "monotonicity", x=lo, y=hi, lhs=nv(lo), rhs=nv(hi))
    return CheckReport(True, trials)
