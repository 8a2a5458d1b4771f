import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nobliv_cg import (Box, InvalidParameterError, InvalidProfileError, SmoothnessProfile,
                       as_non_oblivious, check_dr_submodular, lbar, make_concave_quadratic,
                       make_gaussian_family, mc_value, quadratic_profile)
from nobliv_cg.problems import ObliviousQuadratic, SinusoidFamily
from nobliv_cg.submodular import coverage_fixture


# frozen oracle values
@pytest.mark.parametrize("B,G,L,expected_sq", [(1, 1, 1, 28.0), (1, 1, 0, 20.0), (2, 1, 3, 212.0)])
def test_lbar_substitution(B, G, L, expected_sq):
    assert lbar(SmoothnessProfile(B=B, G=G, L=L)) ** 2 == pytest.approx(expected_sq, rel=1e-12)


def test_lbar_value():
    assert lbar(SmoothnessProfile(B=1, G=1, L=1)) == pytest.approx(5.2915, abs=1e-4)


@pytest.mark.parametrize("kw", [dict(B=0, G=1, L=1), dict(B=1, G=-1, L=1), dict(B=1, G=1, L=-1)])
def test_profile_rejects_bad_constants(kw):
    with pytest.raises(InvalidProfileError):
        SmoothnessProfile(**kw)


@given(st.floats(0.1, 10), st.floats(0.1, 10), st.floats(0, 10), st.floats(0.01, 5))
def test_lbar_monotone_in_each_constant(B, G, L, bump):
    base = lbar(SmoothnessProfile(B=B, G=G, L=L))
    assert lbar(SmoothnessProfile(B=B + bump, G=G, L=L)) >= base
    assert lbar(SmoothnessProfile(B=B, G=G + bump, L=L)) >= base
    assert lbar(SmoothnessProfile(B=B, G=G, L=L + bump)) >= base


def test_gaussian_closed_forms():
    assert make_gaussian_family(1, 1.0).exact_value([0.0]) == pytest.approx(-0.5)
    assert np.array_equal(make_gaussian_family(3, 1.0).exact_grad(np.zeros(3)), np.zeros(3))
    assert make_gaussian_family(2, 0.5).exact_value([1.0, 0.0]) == pytest.approx(-0.75)
    assert np.array_equal(make_gaussian_family(2, 1.0).exact_hessian(np.zeros(2)), -np.eye(2))


def test_gaussian_rejects_nonpositive_sigma():
    with pytest.raises(InvalidParameterError):
        make_gaussian_family(2, 0.0)


def test_mc_value_gaussian_matches_closed_form():
    obj = make_gaussian_family(3, 1.0)
    mean, se = mc_value(obj, np.zeros(3), 100_000, 0)
    assert abs(mean - (-1.5)) <= 5 * se


def test_mc_value_point_mass_is_exact():
    obj = ObliviousQuadratic(np.eye(2), [1.0, -1.0])
    x = np.array([0.3, 0.4])
    for n in (1, 7):
        assert mc_value(obj, x, n, 1)[0] == pytest.approx(obj.exact_value(x), abs=1e-14)


def test_mc_value_single_sample_finite():
    mean, _ = mc_value(make_gaussian_family(2, 1.0), np.zeros(2), 1, 3)
    assert math.isfinite(mean)


def test_dr_check_coverage_grid():
    obj = as_non_oblivious(coverage_fixture())
    grid = [np.array([a, b]) for a in (0, 0.5, 1) for b in (0, 0.5, 1)]
    report = check_dr_submodular(obj, grid)
    assert report.passed and report.max_cross == pytest.approx(-1.0)


def test_dr_check_detects_positive_cross_partial():
    obj = ObliviousQuadratic([[0.0, -1.0], [-1.0, 0.0]], [0.0, 0.0])  # F = x1 x2
    report = check_dr_submodular(obj, [np.array([0.5, 0.5])])
    assert not report.passed and report.max_cross == pytest.approx(1.0)


def test_dr_check_linear_zero():
    obj = ObliviousQuadratic(np.zeros((2, 2)), [1.0, 2.0])
    report = check_dr_submodular(obj, [np.array([0.2, 0.7])])
    assert report.passed and report.max_cross == 0.0


def test_concave_quadratic_optimum_is_zero():
    obj = make_concave_quadratic([0.5, 0.5])
    x_star, value = obj.exact_optimum(Box(0.0, 1.0, 2))
    assert np.allclose(x_star, [0.5, 0.5]) and value == pytest.approx(0.0)


def test_quadratic_profile_constants():
    obj = make_concave_quadratic([0.5, 0.5])
    prof = quadratic_profile(obj, Box(0.0, 1.0, 2))
    assert prof.B == pytest.approx(0.5)
    assert prof.G == pytest.approx(math.sqrt(2))
    assert prof.L == pytest.approx(2.0)
    assert prof.D == pytest.approx(math.sqrt(2))


def test_sinusoid_exact_optimum_on_box():
    obj = SinusoidFamily(5, 1.0, 2.0, 0.0)
    x_star, value = obj.exact_optimum(Box(0.0, 2.0, 5))
    assert np.allclose(x_star, math.pi / 4, atol=1e-6)
    assert value == pytest.approx(5 * math.exp(-2.0), rel=1e-9)


@settings(max_examples=25, deadline=None)
@given(st.lists(st.floats(-2, 2), min_size=3, max_size=3))
def test_sinusoid_gradient_matches_finite_differences(x):
    obj = SinusoidFamily(3, 0.8, 1.5, 0.3)
    x = np.array(x)
    h = 1e-6
    fd = [(obj.exact_value(x + h * e) - obj.exact_value(x - h * e)) / (2 * h) for e in np.eye(3)]
    assert np.allclose(obj.exact_grad(x), fd, atol=1e-6)
