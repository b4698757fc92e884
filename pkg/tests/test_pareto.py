import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from wpareto import (
    AffineModel,
    Dominance,
    MonotoneNorm,
    UsageError,
    certify_boundary,
    dominance_compare,
    eval_utilities,
    find_dominating_point,
    sample_boundary,
)
from wpareto.interference import sample_powers
from wpareto.pareto import brute_force_dominator, random_feasible_candidates

from conftest import random_affine, random_norm


def test_dominance_examples():
    assert dominance_compare([5, 10 / 3], [10 / 3, 2.5]) is Dominance.FIRST
    assert dominance_compare([10 / 3, 2.5], [5, 10 / 3]) is Dominance.SECOND
    assert dominance_compare([5, 3], [5, 3]) is Dominance.NEITHER
    assert dominance_compare([5, 1], [1, 5]) is Dominance.NEITHER
    with pytest.raises(UsageError):
        dominance_compare([1, 2], [1, 2, 3])


profiles = arrays(float, 3, elements=st.floats(0, 10, allow_nan=False))


@settings(max_examples=300, deadline=None)
@given(a=profiles, b=profiles)
def test_dominance_antisymmetric_irreflexive(a, b):
    assert dominance_compare(a, a) is Dominance.NEITHER
    flipped = {Dominance.FIRST: Dominance.SECOND, Dominance.SECOND: Dominance.FIRST,
               Dominance.NEITHER: Dominance.NEITHER}
    assert dominance_compare(b, a) is flipped[dominance_compare(a, b)]


def test_certify_saturated_point(affine2, linf10):
    cert = certify_boundary(affine2, linf10, [10, 10])
    assert cert.on_boundary and cert.dominator is None
    assert cert.solver_crosscheck["c_star"] == pytest.approx(1.0, abs=1e-6)
    np.testing.assert_allclose(cert.solver_crosscheck["recovered_p"], [10, 10], rtol=1e-6)


def test_certify_interior_point(affine2, linf10):
    cert = certify_boundary(affine2, linf10, [5, 5])
    assert not cert.on_boundary
    np.testing.assert_allclose(cert.dominator, [10, 10])
    np.testing.assert_allclose(eval_utilities(affine2, [5, 5]), [10 / 3, 2.5])
    np.testing.assert_allclose(eval_utilities(affine2, cert.dominator), [5, 10 / 3])


def test_certify_point_with_idle_user(affine2, linf10):
    cert = certify_boundary(affine2, linf10, [10, 0])
    assert cert.on_boundary and cert.dominator is None
    cc = cert.solver_crosscheck
    assert cc["reduced_network"] and cc["active_users"] == [0]
    assert cc["c_star"] == pytest.approx(1.0, abs=1e-6)
    assert certify_boundary(affine2, linf10, [10, 0], crosscheck=False).solver_crosscheck is None


def test_certify_zero_vector(affine2, linf10):
    cert = certify_boundary(affine2, linf10, [0, 0])
    assert not cert.on_boundary and cert.solver_crosscheck is None
    assert np.all(eval_utilities(affine2, cert.dominator) > 0)


def test_certify_rejects_outside(affine2, linf10):
    with pytest.raises(UsageError):
        certify_boundary(affine2, linf10, [11, 0])


def test_dominator_examples(affine2, linf10):
    np.testing.assert_allclose(find_dominating_point(affine2, linf10, [5, 5]), [10, 10])
    q = find_dominating_point(affine2, linf10, [0, 0])
    np.testing.assert_allclose(q, [10, 10])
    np.testing.assert_allclose(eval_utilities(affine2, q), [5, 10 / 3])

    q = find_dominating_point(affine2, linf10, [5, 0], perturbation=1e-3)
    np.testing.assert_allclose(q, [10, 1e-2])
    u = eval_utilities(affine2, q)
    assert u[0] > 5.0 and u[1] > 0.0
    assert linf10(q) == pytest.approx(10.0)


def test_dominator_absent_on_boundary(affine2, linf10):
    assert find_dominating_point(affine2, linf10, [10, 3]) is None
    assert find_dominating_point(affine2, linf10, [10, 0]) is None


def test_dominator_reports_failed_verification():
    # with a huge perturbation the idle user's interference hurts user 0 too much
    model = AffineModel([[0, 100.0], [0, 0]], [1, 1])
    norm = MonotoneNorm("linf", 10.0)
    assert find_dominating_point(model, norm, [9, 0], perturbation=0.5) is None
    assert find_dominating_point(model, norm, [9, 0]) is not None


@pytest.mark.parametrize("seed", range(10))
def test_boundary_consistency(seed):
    rng = np.random.default_rng(seed)
    K = int(rng.integers(2, 7))
    model, norm = random_affine(rng, K), random_norm(rng, K)
    pts = sample_powers(rng, 30, K, low=1e-3, high=1.0)
    radii = rng.uniform(0.0, 1.0, 30)
    radii[:10] = 1.0
    for p, r in zip(pts, radii):
        if not np.any(p > 0):
            continue
        p = norm.normalize(p) * r
        cert = certify_boundary(model, norm, p, crosscheck=False)
        dom = find_dominating_point(model, norm, p)
        assert cert.on_boundary == (dom is None)


def test_sample_boundary_forced_uniform(affine2, linf10):
    [s] = sample_boundary(affine2, linf10, 1)
    np.testing.assert_allclose(s.p, [10, 10])
    np.testing.assert_allclose(s.u, eval_utilities(affine2, [10, 10]))


def test_sample_boundary_contents():
    rng = np.random.default_rng(3)
    model, norm = random_affine(rng, 4), MonotoneNorm("l1", 7.0)
    samples = sample_boundary(model, norm, 50, rng_seed=9)
    assert len(samples) == 50
    np.testing.assert_allclose(samples[0].p, np.full(4, 7.0 / 4))
    for k in range(4):
        np.testing.assert_allclose(samples[1 + k].p, 7.0 * np.eye(4)[k])
    for s in samples:
        assert abs(norm(s.p) - norm.budget) <= 1e-12 * norm.budget
        np.testing.assert_allclose(s.u, eval_utilities(model, s.p), rtol=1e-14)
    again = sample_boundary(model, norm, 50, rng_seed=9)
    assert all(np.array_equal(a.p, b.p) for a, b in zip(samples, again))


def test_boundary_samples_are_mutually_non_dominating(affine2, linf10):
    U = np.array([s.u for s in sample_boundary(affine2, linf10, 100, rng_seed=1)])
    # brute-force pairwise scan
    strict = np.all(U[:, None, :] > U[None, :, :], axis=-1)
    assert not strict.any()


def test_random_candidates_are_feasible():
    rng = np.random.default_rng(0)
    norm = MonotoneNorm("l1", 3.0)
    c = random_feasible_candidates(norm, 5, 2000, rng)
    assert c.shape == (2000, 5)
    assert np.all(norm(c) <= 3.0) and np.all(c >= 3e-6)


def test_brute_force_finds_dominator_for_interior(affine2, linf10):
    assert brute_force_dominator(affine2, linf10, [1, 1], 2000) is not None
    assert brute_force_dominator(affine2, linf10, [10, 10], 2000) is None
