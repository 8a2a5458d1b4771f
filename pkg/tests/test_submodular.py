import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nobliv_cg import (Cardinality, Modular, Partition, SizeLimitError, as_non_oblivious,
                       brute_force_opt, mc_value, multilinear_anchor_gradient,
                       multilinear_delta_estimate, multilinear_grad_exact,
                       multilinear_hessian_entry_exact, multilinear_value_exact, round_solution)
from nobliv_cg.estimators import anchor_gradient_samples, path_delta_samples
from nobliv_cg.submodular import (cardinality_fixture, coverage_fixture, random_coverage,
                                  random_directed_cut, random_facility_location, random_modular,
                                  set_to_vector)


def _within(rows, target):
    mean = rows.mean(axis=0)
    se = rows.std(axis=0, ddof=1) / np.sqrt(rows.shape[0])
    return np.all(np.abs(mean - target) <= 5 * np.maximum(se, 1e-12))


def test_coverage_fixture_values():
    f = coverage_fixture()
    assert multilinear_value_exact(f, [0.5, 0.5]) == pytest.approx(0.75)
    assert multilinear_grad_exact(f, [0.5, 0.5], 0) == pytest.approx(0.5)
    assert multilinear_hessian_entry_exact(f, [0.3, 0.8], 0, 1) == pytest.approx(-1.0)
    assert multilinear_hessian_entry_exact(f, [0.3, 0.8], 1, 1) == 0.0


@pytest.mark.parametrize("maker", [coverage_fixture, lambda: random_directed_cut(4, rng=0),
                                   lambda: random_facility_location(3, rng=1)])
def test_integral_point_gives_set_value(maker):
    f = maker()
    d = f.ground_size
    for mask in range(1 << d):
        S = np.array([(mask >> i) & 1 for i in range(d)], dtype=bool)
        assert multilinear_value_exact(f, S.astype(float)) == pytest.approx(f.expected(S))


def test_modular_extension_is_linear():
    f = cardinality_fixture(3)
    x = np.array([0.2, 0.9, 0.4])
    assert np.allclose(multilinear_grad_exact(f, x), 1.0)
    assert multilinear_hessian_entry_exact(f, x, 0, 2) == pytest.approx(0.0, abs=1e-12)


def test_multilinear_anchor_coverage():
    rows = anchor_gradient_samples(as_non_oblivious(coverage_fixture(), exact=False),
                                   np.array([0.5, 0.5]), 100_000, 1)
    assert _within(rows, np.array([0.5, 0.5]))


def test_multilinear_anchor_modular_exact():
    rows = anchor_gradient_samples(as_non_oblivious(cardinality_fixture(3), exact=False),
                                   np.array([0.1, 0.5, 0.7]), 20, 2)
    assert np.array_equal(rows, np.ones((20, 3)))
    assert np.array_equal(multilinear_anchor_gradient(coverage_fixture(), [1.0, 0.0], 1, 0), [1, 0])


def test_multilinear_delta_coverage():
    obj = as_non_oblivious(coverage_fixture(), exact=False)
    rows = path_delta_samples(obj, np.zeros(2), np.array([0.5, 0.0]), 100_000, 3)
    assert _within(rows, np.array([0.0, -0.5]))


def test_multilinear_delta_degenerate_cases():
    f = coverage_fixture()
    assert np.array_equal(multilinear_delta_estimate(f, [0.3, 0.3], [0.3, 0.3], 10, 0), [0, 0])
    rows = path_delta_samples(as_non_oblivious(cardinality_fixture(3), exact=False),
                              np.zeros(3), np.full(3, 0.5), 50, 4)
    assert np.array_equal(rows, np.zeros((50, 3)))


def test_brute_force_fixtures():
    assert brute_force_opt(coverage_fixture(), Cardinality(1, 2)) == (frozenset({0}), 1.0)
    assert brute_force_opt(cardinality_fixture(3), Cardinality(2, 3))[1] == 2.0
    assert brute_force_opt(coverage_fixture(), Cardinality(0, 2)) == (frozenset(), 0.0)


def test_brute_force_partition():
    f = Modular([[3.0, 1.0, 2.0, 5.0]])
    S, v = brute_force_opt(f, Partition(((0, 1), (2, 3)), (1, 1)))
    assert S == frozenset({0, 3}) and v == 8.0


def test_brute_force_size_limit():
    with pytest.raises(SizeLimitError):
        brute_force_opt(random_modular(21, rng=0), Cardinality(2, 21))


def test_round_independent_integral():
    f = cardinality_fixture(3)
    for seed in range(5):
        assert round_solution([1, 0, 1], Cardinality(2, 3), f, "independent", seed) == {0, 2}


def test_round_pipage_coverage():
    f = coverage_fixture()
    S = round_solution([0.5, 0.5], Cardinality(1, 2), f, "pipage")
    assert len(S) == 1 and f.expected(set_to_vector(S, 2).astype(bool)) == 1.0 >= 0.75


def test_round_pipage_integral_unchanged():
    f = random_coverage(4, rng=2)
    assert round_solution([0, 1, 1, 0], Cardinality(2, 4), f, "pipage") == {1, 2}


def test_mc_value_multilinear():
    obj = as_non_oblivious(coverage_fixture())
    assert mc_value(obj, np.array([1.0, 0.0]), 10, 0)[0] == 1.0
    mean, se = mc_value(obj, np.array([0.5, 0.5]), 100_000, 1)
    assert abs(mean - 0.75) <= 5 * se


unit = st.lists(st.floats(0, 1), min_size=4, max_size=4).map(np.array)


@settings(max_examples=30, deadline=None)
@given(unit)
def test_coverage_extension_is_dr_submodular(x):
    f = random_coverage(4, rng=11)
    for i in range(4):
        for j in range(i + 1, 4):
            assert multilinear_hessian_entry_exact(f, x, i, j) <= 1e-12


@settings(max_examples=30, deadline=None)
@given(unit, st.integers(0, 3))
def test_gradient_is_pinned_difference(x, i):
    f = random_directed_cut(4, rng=12)
    hi, lo = x.copy(), x.copy()
    hi[i], lo[i] = 1.0, 0.0
    assert multilinear_grad_exact(f, x, i) == pytest.approx(
        multilinear_value_exact(f, hi) - multilinear_value_exact(f, lo), abs=1e-12)
