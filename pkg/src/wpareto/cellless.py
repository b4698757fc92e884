"""Uplink cell-less network with use-and-then-forget SINR utilities.

Each user ``k`` is served by the ``cluster_size`` APs with the largest
large-scale gains.  Every serving AP applies a local maximum-ratio combiner,
and the CPU weights the per-AP outputs with large-scale fading decoding
(LSFD) coefficients ``a``.  Writing ``g_kj`` for the vector of per-AP
combined channels of user ``j`` seen through user ``k``'s combiners, the
UatF SINR for coefficients ``a`` is

    p_k |a^H b_k|^2 / (a^H Ψ_k(p) a),
    Ψ_k(p) = Σ_j p_j G_kj - p_k b_k b_k^H + S_k,

with ``b_k = E[g_kk]``, ``G_kj = E[g_kj g_kj^H]`` and ``S_k`` the combiner
noise energies.  Optimizing over ``a`` gives ``u_k(p) = p_k / f_k(p)`` with
``f_k(p) = 1 / (b_k^H Ψ_k(p)^{-1} b_k)``, an infimum of functions affine in
``p`` and hence concave and standard.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import EvaluationError, ModelBuildError, UsageError
from .interference import MonotoneNorm, as_power_vector, eval_utilities

MIN_DISTANCE_M = 1.0
CHUNK_DRAWS = 2000


def dbm_to_watts(dbm: float) -> float:
    return 10.0 ** ((dbm - 30.0) / 10.0)


@dataclass
class NetworkConfig:
    L: int = 16
    N: int = 2
    K: int = 16
    area_side: float = 1000.0
    cluster_size: int = 4
    ap_layout: str = "grid"
    ap_positions: Optional[np.ndarray] = None
    user_layout: str = "random"
    user_positions: Optional[np.ndarray] = None
    ref_loss_db: float = 30.5
    exponent: float = 3.76
    noise_power_dbm: float = -94.0
    mc_draws: int = 20_000
    rng_seed: int = 0
    # estimation error variance relative to the large-scale gain; 0 is perfect CSI
    csi_error: float = 0.0
    budget_dbm: float = 20.0

    def __post_init__(self):
        for name in ("L", "N", "K", "cluster_size", "mc_draws", "rng_seed"):
            setattr(self, name, int(getattr(self, name)))
        if min(self.L, self.N, self.K) < 1:
            raise UsageError("L, N and K must be >= 1")
        if not 1 <= self.cluster_size <= self.L:
            raise UsageError(f"cluster_size must be in [1, L={self.L}], got {self.cluster_size}")
        if not self.area_side > 0:
            raise UsageError("area_side must be positive")
        if self.mc_draws < 100:
            raise UsageError(f"mc_draws must be >= 100, got {self.mc_draws}")
        if self.csi_error < 0:
            raise UsageError("csi_error must be nonnegative")
        if self.ap_positions is not None:
            self.ap_layout = "explicit"
            self.ap_positions = _positions(self.ap_positions, self.L, "ap_positions")
        elif self.ap_layout == "explicit":
            raise UsageError("ap_layout=explicit needs ap_positions")
        elif self.ap_layout != "grid":
            raise UsageError(f"unknown ap_layout {self.ap_layout!r}")
        if self.user_positions is not None:
            self.user_layout = "explicit"
            self.user_positions = _positions(self.user_positions, self.K, "user_positions")
        elif self.user_layout == "explicit":
            raise UsageError("user_layout=explicit needs user_positions")
        elif self.user_layout != "random":
            raise UsageError(f"unknown user_layout {self.user_layout!r}")

    @property
    def budget_watts(self) -> float:
        return dbm_to_watts(self.budget_dbm)


def _positions(pos, count, name):
    arr = np.asarray(pos, dtype=float).reshape(-1, 2) if np.size(pos) else np.zeros((0, 2))
    if arr.shape != (count, 2):
        raise UsageError(f"{name} must hold {count} 2-D positions, got {arr.shape[0]}")
    return arr


def load_network_config(path) -> NetworkConfig:
    """Parse a ``key = value`` file (``#`` comments) into a :class:`NetworkConfig`.

    Positions are written as ``x1 y1; x2 y2; ...`` in meters.
    """
    known = {f.name: f for f in fields(NetworkConfig)}
    kwargs = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in known:
            raise UsageError(f"{path}:{lineno}: unknown key {key!r}")
        try:
            if key.endswith("positions"):
                kwargs[key] = [[float(c) for c in pt.replace(",", " ").split()]
                               for pt in value.split(";") if pt.strip()]
            elif key.endswith("layout"):
                kwargs[key] = value.lower()
            elif key in ("L", "N", "K", "cluster_size", "mc_draws", "rng_seed"):
                kwargs[key] = int(value)
            else:
                kwargs[key] = float(value)
        except ValueError:
            raise UsageError(f"{path}:{lineno}: bad value for {key!r}: {value!r}") from None
    return NetworkConfig(**kwargs)


@dataclass
class Network:
    ap_positions: np.ndarray  # (L, 2)
    user_positions: np.ndarray  # (K, 2)
    beta: np.ndarray  # (L, K) gain over noise, per watt of transmit power
    clusters: np.ndarray  # (K, cluster_size) serving APs, strongest first


def _seeds(cfg: NetworkConfig):
    users, channels = np.random.SeedSequence(cfg.rng_seed).spawn(2)
    return np.random.default_rng(users), np.random.default_rng(channels)


def grid_positions(L: int, side: float) -> np.ndarray:
    n = math.isqrt(L)
    if n * n != L:
        raise UsageError(f"regular grid needs a square AP count, got L={L}")
    pitch = side / n
    c = pitch * (np.arange(n) + 0.5)
    xx, yy = np.meshgrid(c, c, indexing="xy")
    return np.column_stack([xx.ravel(), yy.ravel()])


def generate_network(cfg: NetworkConfig) -> Network:
    aps = grid_positions(cfg.L, cfg.area_side) if cfg.ap_layout == "grid" else cfg.ap_positions
    if cfg.user_layout == "random":
        users = _seeds(cfg)[0].uniform(0.0, cfg.area_side, size=(cfg.K, 2))
    else:
        users = cfg.user_positions
    d = np.linalg.norm(aps[:, None, :] - users[None, :, :], axis=-1)
    d = np.maximum(d, MIN_DISTANCE_M)
    loss_db = cfg.ref_loss_db + 10.0 * cfg.exponent * np.log10(d)
    beta = 10.0 ** ((30.0 - loss_db - cfg.noise_power_dbm) / 10.0)
    # stable sort keeps ties in AP index order
    clusters = np.argsort(-beta, axis=0, kind="stable")[: cfg.cluster_size].T
    return Network(aps, users, beta, clusters)


@dataclass
class UserMoments:
    user: int
    serving: np.ndarray  # (D,) AP indices
    b: np.ndarray  # (D,) E[g_kk]
    G: np.ndarray  # (K, D, D) E[g_kj g_kj^H]
    S: np.ndarray  # (D,) diagonal of the noise-weighting matrix

    @property
    def S_matrix(self) -> np.ndarray:
        return np.diag(self.S).astype(complex)


def rayleigh_channels(beta: np.ndarray, N: int) -> Callable:
    """Sampler of i.i.d. Rayleigh channels ``h[d, l, n, k] ~ CN(0, β_lk)``."""
    scale = np.sqrt(beta / 2.0)[None, :, None, :]

    def draw(rng, n):
        L, K = beta.shape
        z = rng.standard_normal((n, L, N, K)) + 1j * rng.standard_normal((n, L, N, K))
        return scale * z

    return draw


def estimate_moments(network: Network, cfg: NetworkConfig,
                     channel_sampler: Optional[Callable] = None) -> list[UserMoments]:
    """Monte-Carlo estimates of the per-user channel moments.

    ``channel_sampler(rng, n)`` returns ``n`` channel draws of shape
    ``(n, L, N, K)``; the default draws i.i.d. Rayleigh fading.  Draws are
    processed in fixed-size chunks in order, so results depend only on the seed.
    """
    beta = network.beta
    L, K = beta.shape
    if channel_sampler is None:
        channel_sampler = rayleigh_channels(beta, cfg.N)
    rng = _seeds(cfg)[1]
    D = network.clusters.shape[1]
    sum_g = np.zeros((K, D, K), dtype=complex)
    sum_gg = np.zeros((K, K, D, D), dtype=complex)
    sum_vv = np.zeros((K, D))
    err_scale = np.sqrt(cfg.csi_error * beta / 2.0)[None, :, None, :]

    done = 0
    while done < cfg.mc_draws:
        n = min(CHUNK_DRAWS, cfg.mc_draws - done)
        h = channel_sampler(rng, n)
        h_hat = h
        if cfg.csi_error > 0:
            e = rng.standard_normal(h.shape) + 1j * rng.standard_normal(h.shape)
            h_hat = h + err_scale * e
        for k in range(K):
            serving = network.clusters[k]
            # MR combiner normalized per AP; the LSFD weights absorb any per-AP scaling
            v = h_hat[:, serving][..., k] / np.sqrt(beta[serving, k])[None, :, None]
            g = np.einsum("cdn,cdnj->cdj", v.conj(), h[:, serving])
            sum_g[k] += g.sum(axis=0)
            sum_gg[k] += np.einsum("cdj,cej->jde", g, g.conj())
            sum_vv[k] += (np.abs(v) ** 2).sum(axis=(0, 2))
        done += n

    moments = []
    for k in range(K):
        b = sum_g[k, :, k] / cfg.mc_draws
        G = sum_gg[k] / cfg.mc_draws
        G = 0.5 * (G + np.conj(np.swapaxes(G, -1, -2)))
        S = sum_vv[k] / cfg.mc_draws
        if np.linalg.norm(b) < 1e-12:
            raise ModelBuildError(f"user {k}: mean combined channel is zero, no usable combiner")
        if np.any(S <= 0):
            raise ModelBuildError(f"user {k}: zero combiner energy at a serving AP")
        moments.append(UserMoments(k, network.clusters[k].copy(), b, G, S))
    return moments


def psi(m: UserMoments, p) -> np.ndarray:
    """``Ψ_k(p)`` for a power vector or a batch of them; shape ``(..., D, D)``."""
    p = np.asarray(p, dtype=float)
    out = np.einsum("...j,jab->...ab", p, m.G)
    out = out - p[..., m.user, None, None] * np.outer(m.b, m.b.conj())
    return out + np.diag(m.S)


def _quad_inverse(m: UserMoments, p) -> np.ndarray:
    """``b^H Ψ(p)^{-1} b`` via a Cholesky factor of Ψ."""
    Psi = psi(m, p)
    try:
        chol = np.linalg.cholesky(Psi)
    except np.linalg.LinAlgError:
        cond = float(np.max(np.linalg.cond(Psi)))
        raise EvaluationError(f"user {m.user}: Ψ(p) is not numerically positive definite "
                              f"(condition number ~{cond:.3g})", condition=cond) from None
    b = np.broadcast_to(m.b, Psi.shape[:-1])[..., None]
    y = np.linalg.solve(chol, b)[..., 0]
    return np.sum(np.abs(y) ** 2, axis=-1)


def eval_fk(m: UserMoments, p) -> np.ndarray | float:
    """Interference ``f_k(p) = 1 / (b^H Ψ_k(p)^{-1} b)`` of the user ``m`` describes."""
    out = 1.0 / _quad_inverse(m, as_power_vector(p, m.G.shape[0]))
    return float(out) if np.ndim(out) == 0 else out


def lsfd_coefficients(m: UserMoments, p) -> np.ndarray:
    """LSFD vector ``Ψ_k(p)^{-1} b`` attaining the infimum in ``f_k``."""
    return np.linalg.solve(psi(m, np.asarray(p, dtype=float)), m.b)


def lsfd_quotient(m: UserMoments, p, a) -> np.ndarray | float:
    """Interference-plus-noise ratio ``a^H Ψ a / |a^H b|^2`` for LSFD vector(s) ``a``."""
    Psi = psi(m, np.asarray(p, dtype=float))
    a = np.asarray(a, dtype=complex)
    num = np.real(np.einsum("...a,ab,...b->...", a.conj(), Psi, a))
    return num / np.abs(a.conj() @ m.b) ** 2


class CellLessModel:
    """Interference model ``p ↦ (f_1(p), ..., f_K(p))`` built from user moments."""

    def __init__(self, moments: Sequence[UserMoments]):
        self.moments = list(moments)
        self.K = len(self.moments)
        for k, m in enumerate(self.moments):
            if m.user != k:
                raise ModelBuildError(f"moments at position {k} belong to user {m.user}")
            if m.G.shape[0] != self.K:
                raise ModelBuildError(f"user {k}: moments describe {m.G.shape[0]} users, "
                                      f"expected {self.K}")

    def __call__(self, p) -> np.ndarray:
        p = as_power_vector(p, self.K)
        cols = [1.0 / _quad_inverse(m, p) for m in self.moments]
        return np.stack(cols, axis=-1)

    def __repr__(self):
        return f"CellLessModel(K={self.K})"


def build_cellless(cfg: NetworkConfig, channel_sampler=None) -> tuple[Network, CellLessModel]:
    net = generate_network(cfg)
    return net, CellLessModel(estimate_moments(net, cfg, channel_sampler))


def eval_rates(model, p) -> np.ndarray:
    """UatF rates ``log2(1 + u_k(p))`` in bit/s/Hz."""
    return np.log2(1.0 + eval_utilities(model, p))


# --------------------------------------------------------------------------
# power policies

POLICY_KINDS = ("full", "random", "fractional")


@dataclass(frozen=True)
class PowerPolicy:
    kind: str
    seed: int = 0
    exponent: float = -1.0

    def __post_init__(self):
        if self.kind not in POLICY_KINDS:
            raise UsageError(f"unknown policy {self.kind!r}; expected one of {POLICY_KINDS}")


def apply_policy(policy: PowerPolicy, beta, norm: MonotoneNorm, clusters=None) -> np.ndarray:
    """Raw power vector of the policy, rescaled so that ``‖p‖ = p̄``.

    The fractional policy uses ``p_k ∝ (Σ_{l ∈ D_k} β_lk)^ν``; with
    ``clusters=None`` the sum runs over all APs.
    """
    beta = np.atleast_2d(np.asarray(beta, dtype=float))
    K = beta.shape[1]
    if policy.kind == "full":
        raw = np.full(K, norm.budget)
    elif policy.kind == "random":
        rng = np.random.default_rng(policy.seed)
        raw = rng.uniform(0.0, norm.budget, K)
        while not np.any(raw > 0):
            raw = rng.uniform(0.0, norm.budget, K)
    else:
        if clusters is None:
            gain = beta.sum(axis=0)
        else:
            gain = np.array([beta[clusters[k], k].sum() for k in range(K)])
        raw = gain ** policy.exponent
    return norm.normalize(raw)


@dataclass
class PolicyOutcome:
    policy: str
    p: np.ndarray
    sinr: np.ndarray
    rate: np.ndarray = field(init=False)

    def __post_init__(self):
        self.rate = np.log2(1.0 + self.sinr)


def run_policies(model, network: Network, norm: MonotoneNorm,
                 policies: Sequence[PowerPolicy]) -> list[PolicyOutcome]:
    out = []
    for pol in policies:
        p = apply_policy(pol, network.beta, norm, network.clusters)
        out.append(PolicyOutcome(pol.kind, p, eval_utilities(model, p)))
    return out
