import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nobliv_cg import (EmptyBatchError, GradientEstimate, HvpMethod, InvalidParameterError,
                       UnsupportedOperationError, anchor_gradient, delta_exact,
                       hessian_estimate, hvp_fd, make_gaussian_family, path_delta,
                       sample_path_batch, update_gradient_estimate, xi_delta)
from nobliv_cg.estimators import (PathSample, anchor_gradient_samples, default_delta,
                                  path_delta_samples, replay_history)
from nobliv_cg.problems import ObliviousQuadratic, SinusoidFamily, SmoothnessProfile
from nobliv_cg.submodular import as_non_oblivious, coverage_fixture


def _within(samples, target, k=5.0):
    mean = samples.mean(axis=0)
    se = samples.std(axis=0, ddof=1) / np.sqrt(samples.shape[0])
    return np.all(np.abs(mean - target) <= k * np.maximum(se, 1e-12))


def test_hessian_oblivious_reduces_to_payoff_hessian():
    A = np.array([[2.0, 0.5], [0.5, 1.0]])
    obj = ObliviousQuadratic(A, [1.0, 0.0], noise=0.3)
    y = np.array([0.2, 0.1])
    H = hessian_estimate(obj, y, obj.draw(y[None], np.random.default_rng(0)))
    assert np.allclose(H, -A)


def test_hessian_gaussian_at_center_realisation():
    # F~ = phi(z) does not depend on x; at z = y = 0 every term vanishes.
    obj = make_gaussian_family(2, 1.0)
    z = obj.draw(np.zeros((1, 2)), np.random.default_rng(0))
    z.payload[:] = 0.0
    z.value[:] = 0.0
    z.logp_grad[:] = 0.0
    assert np.allclose(hessian_estimate(obj, np.zeros(2), z), 0.0)


def test_hessian_gaussian_1d_unbiased():
    obj = make_gaussian_family(1, 1.0)
    X = np.ones((100_000, 1))
    H = hessian_estimate(obj, X, obj.draw(X, np.random.default_rng(1)))
    assert _within(H.reshape(-1, 1), np.array([-1.0]))


def test_hessian_requires_second_order():
    obj = as_non_oblivious(coverage_fixture())
    z = obj.draw(np.full((1, 2), 0.5), np.random.default_rng(0))
    with pytest.raises(UnsupportedOperationError):
        hessian_estimate(obj, np.full(2, 0.5), z)


def test_path_batch_convex_combination():
    obj = make_gaussian_family(2, 1.0)
    b = sample_path_batch(obj, np.zeros(2), np.ones(2), 50, 0)
    assert np.allclose(b.X, b.a[:, None] * np.ones(2))
    same = sample_path_batch(obj, np.ones(2), np.ones(2), 10, 0)
    assert np.allclose(same.X, 1.0)


def test_path_batch_uniform_a():
    b = sample_path_batch(make_gaussian_family(1, 1.0), [0.0], [1.0], 10_000, 3)
    assert abs(b.a.mean() - 0.5) <= 3 * 0.2887 / 100


def test_delta_exact_zero_displacement():
    obj = make_gaussian_family(2, 1.0)
    b = sample_path_batch(obj, np.zeros(2), np.ones(2), 10, 0)
    assert np.array_equal(delta_exact(obj, b, np.zeros(2)), np.zeros(2))
    assert np.array_equal(xi_delta(obj, b, np.zeros(2), 1e-3), np.zeros(2))


def test_delta_exact_gaussian_unbiased():
    obj = make_gaussian_family(3, 1.0)
    e1 = np.eye(3)[0]
    rows = path_delta_samples(obj, np.zeros(3), e1, 100_000, 5, "exact")
    assert _within(rows, -e1)


def test_delta_exact_accepts_list_of_samples():
    obj = make_gaussian_family(2, 1.0)
    b = sample_path_batch(obj, np.zeros(2), np.ones(2), 20, 0)
    assert np.allclose(delta_exact(obj, list(b), np.ones(2)), delta_exact(obj, b, np.ones(2)))
    assert isinstance(b[0], PathSample)
    with pytest.raises(EmptyBatchError):
        delta_exact(obj, [], np.ones(2))


def test_hvp_fd_quadratic_exact():
    A = np.array([[2.0, 1.0], [1.0, 3.0]])
    for delta in (1e-1, 1e-4):
        assert np.allclose(hvp_fd(lambda u: A @ u, np.zeros(2), [1.0, 0.0], delta), [2, 1],
                           atol=1e-10)


def test_hvp_fd_quartic_example():
    out = hvp_fd(lambda u: u**3 / 3, np.array([1.0]), np.array([1.0]), 0.1)
    assert out[0] == pytest.approx(1.00333, abs=1e-5)
    assert abs(out[0] - 1.0) <= 1 * 2.2 * 0.1


def test_hvp_fd_zero_direction():
    assert np.array_equal(hvp_fd(np.sin, np.ones(2), np.zeros(2), 1e-3), np.zeros(2))


def test_xi_delta_converges_to_delta_exact():
    obj = SinusoidFamily(3, 0.7, 1.3, 0.2)
    x0, x1 = np.array([0.1, 0.5, 0.9]), np.array([0.6, 0.2, 0.4])
    b = sample_path_batch(obj, x0, x1, 500, 2)
    exact = delta_exact(obj, b, x1 - x0)
    assert np.allclose(xi_delta(obj, b, x1 - x0, 1e-4), exact, atol=1e-6)


def test_update_gradient_estimate():
    est = GradientEstimate(np.array([1.0, 2.0]))
    assert np.array_equal(update_gradient_estimate(est, np.array([0.5, -1.0])).g, [1.5, 1.0])
    assert np.array_equal(update_gradient_estimate(est, np.zeros(2)).g, est.g)


@settings(max_examples=30)
@given(st.lists(st.lists(st.floats(-10, 10), min_size=3, max_size=3), min_size=1, max_size=8))
def test_update_telescopes(deltas):
    est = anchor_gradient(ObliviousQuadratic(np.eye(3), [1.0, 2.0, 3.0]), np.zeros(3), 1, 0,
                          keep_history=True)
    g0 = est.g.copy()
    for d in deltas:
        est = update_gradient_estimate(est, np.array(d), 1)
    assert np.allclose(est.g, g0 + np.sum(deltas, axis=0))
    assert np.allclose(replay_history(est), est.g)
    assert est.n_updates == len(deltas)


def test_anchor_oblivious_mean_of_gradients():
    obj = ObliviousQuadratic(np.eye(2), [1.0, -1.0])
    assert np.allclose(anchor_gradient(obj, np.array([0.5, 0.5]), 1, 0).g, [0.5, -1.5])


def test_anchor_gaussian_unbiased_at_origin():
    rows = anchor_gradient_samples(make_gaussian_family(3, 1.0), np.zeros(3), 100_000, 9)
    assert _within(rows, np.zeros(3))


def test_anchor_thread_count_invariant(monkeypatch):
    obj = make_gaussian_family(4, 1.0)
    x = np.full(4, 0.2)
    monkeypatch.setenv("NOBLIV_CG_THREADS", "1")
    a = anchor_gradient(obj, x, 10_000, 7).g
    monkeypatch.setenv("NOBLIV_CG_THREADS", "4")
    b = anchor_gradient(obj, x, 10_000, 7).g
    assert np.array_equal(a, b)


def test_path_delta_zero_displacement():
    obj = make_gaussian_family(2, 1.0)
    assert np.array_equal(path_delta(obj, np.ones(2), np.ones(2), 10, 0), np.zeros(2))


def test_hvp_method_validation():
    with pytest.raises(InvalidParameterError):
        HvpMethod("bogus")
    with pytest.raises(InvalidParameterError):
        HvpMethod("fd").resolve(make_gaussian_family(2, 1.0))
    assert HvpMethod("auto").resolve(make_gaussian_family(2, 1.0)).kind == "exact"


def test_default_delta_positive():
    prof = SmoothnessProfile(B=1, G=1, L=1, L2=1, D=1)
    assert 0 < default_delta(prof, 0.1, 100) < 1
