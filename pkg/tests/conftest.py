import numpy as np
import pytest

from wpareto import AffineModel, MonotoneNorm
from wpareto.cellless import NetworkConfig, build_cellless

F2 = [[0.0, 0.1], [0.2, 0.0]]
SIGMA2 = [1.0, 1.0]
# positive root of 0.4 c^2 + c - 10 = 0, from p1 = c(0.1 p2 + 1), p2 = c(0.2 p1 + 1), p2 = 10
C_STAR_2 = (-1.0 + np.sqrt(17.0)) / 0.8


def bisection_maxmin(F, sigma, weights, norm, iters=200):
    """Independent oracle for affine models.

    For a level ``c`` the system ``p = c W (F p + σ)`` has a nonnegative
    solution iff the spectral radius of ``c W F`` is below one, and then the
    least solution is ``(I - cWF)^{-1} cWσ``; ``c`` is achievable iff that
    solution fits the budget.  Bisect on ``c``.
    """
    F = np.asarray(F, float)
    W = np.diag(np.asarray(weights, float))
    sigma = np.asarray(sigma, float)
    K = len(sigma)

    def point(c):
        A = c * W @ F
        if np.max(np.abs(np.linalg.eigvals(A))) >= 1.0:
            return None
        p = np.linalg.solve(np.eye(K) - A, c * W @ sigma)
        return p if norm(p) <= norm.budget else None

    lo, hi = 0.0, 1.0
    while point(hi) is not None:
        hi *= 2.0
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if point(mid) is None:
            hi = mid
        else:
            lo = mid
    return lo, point(lo)


def random_affine(rng, K):
    F = rng.uniform(0.0, 1.0, (K, K)) / K
    F[rng.random((K, K)) < 0.2] = 0.0
    np.fill_diagonal(F, 0.0)
    sigma = rng.uniform(0.1, 1.0, K)
    return AffineModel(F, sigma)


def random_norm(rng, K, budget=None):
    kind = ["l1", "linf", "wl1", "wlinf"][rng.integers(4)]
    w = rng.uniform(0.5, 2.0, K) if kind.startswith("w") else None
    return MonotoneNorm(kind, budget or float(rng.uniform(1.0, 20.0)), w)


@pytest.fixture
def affine2():
    return AffineModel(F2, SIGMA2)


@pytest.fixture
def linf10():
    return MonotoneNorm("linf", 10.0)


DESK_CONFIG = dict(K=8, L=9, N=2, cluster_size=3, mc_draws=20_000, rng_seed=7)


@pytest.fixture(scope="session")
def desk_cellless():
    cfg = NetworkConfig(**DESK_CONFIG)
    net, model = build_cellless(cfg)
    return cfg, net, model


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
