import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nobliv_cg import (Box, CardinalityPolytope, ConfigError, InfeasibleShrinkError,
                       PartitionMatroidPolytope, ScaledSimplex, contains, diameter, lmo,
                       region_from_dict, shrink)


def test_box_sign_rule():
    assert np.array_equal(lmo(Box(0, 1, 3), [1, -2, 0]), [1, 0, 0])


def test_cardinality_top_k():
    assert np.array_equal(lmo(CardinalityPolytope(2, 3), [3, 1, 2]), [1, 0, 1])


def test_simplex_best_coordinate():
    assert np.array_equal(lmo(ScaledSimplex(3, 1.0), [0.5, 2, -1]), [0, 1, 0])


def test_shrink_box_cap():
    v = shrink(Box(0, 1, 2), [0.6, 0.2], [1, 1]).lmo(np.array([1.0, 1.0]))
    assert np.allclose(v, [0.4, 0.8])


def test_shrink_degenerate_cap():
    r = shrink(CardinalityPolytope(2, 3), [1, 0.5, 0], [1, 0.5, 0])
    assert not r.lmo(np.array([1.0, 2.0, 3.0])).any()


def test_shrink_cardinality_vertex():
    v = shrink(CardinalityPolytope(1, 2), [0.5, 0], 1.0).lmo(np.array([1.0, 1.0]))
    assert np.array_equal(v, [0, 1])


def test_shrink_rejects_iterate_above_ubar():
    with pytest.raises(InfeasibleShrinkError):
        shrink(Box(0, 1, 2), [0.9, 0.0], 0.5)


@pytest.mark.parametrize("region,expected", [
    (Box(0, 1, 3), math.sqrt(3)), (ScaledSimplex(4, 1.0), math.sqrt(2)),
    (CardinalityPolytope(1, 4), math.sqrt(2)), (CardinalityPolytope(3, 4), 2.0)])
def test_diameter(region, expected):
    assert diameter(region) == pytest.approx(expected)


def test_contains():
    assert contains(Box(0, 1, 2), [0.5, 1.0])
    assert not contains(CardinalityPolytope(1, 2), [0.6, 0.6])
    assert contains(Box(0, 1, 2), [1 + 1e-10, 0.0], 1e-9)


def test_region_roundtrip():
    for r in (Box(0, [1, 2]), ScaledSimplex(3, 2.0), CardinalityPolytope(2, 4),
              PartitionMatroidPolytope([[0, 2], [1]], [1, 1])):
        r2 = region_from_dict(r.to_dict())
        g = np.linspace(-1, 1, r.dim)
        assert np.array_equal(r.lmo(g), r2.lmo(g))


def test_region_unknown_type():
    with pytest.raises(ConfigError):
        region_from_dict({"type": "ball"})


def _vertices_card(k, d):
    from itertools import combinations
    out = []
    for size in range(k + 1):
        for S in combinations(range(d), size):
            v = np.zeros(d)
            v[list(S)] = 1
            out.append(v)
    return out


gains = st.lists(st.floats(-5, 5, allow_nan=False), min_size=4, max_size=4).map(np.array)


@settings(max_examples=60)
@given(gains, st.integers(0, 4))
def test_cardinality_lmo_is_optimal(g, k):
    region = CardinalityPolytope(k, 4)
    v = region.lmo(g)
    assert region.contains(v)
    assert g @ v >= max(g @ u for u in _vertices_card(k, 4)) - 1e-9


@settings(max_examples=60)
@given(gains, st.floats(0.1, 10))
def test_lmo_invariant_to_positive_scaling(g, c):
    for region in (Box(0, 1, 4), ScaledSimplex(4, 1.5), CardinalityPolytope(2, 4),
                   PartitionMatroidPolytope([[0, 1], [2, 3]], [1, 2])):
        assert np.array_equal(region.lmo(g), region.lmo(c * g))


@settings(max_examples=60)
@given(gains, st.lists(st.floats(0, 1), min_size=4, max_size=4).map(np.array))
def test_shrunk_lmo_respects_cap(g, x):
    region = CardinalityPolytope(2, 4)
    v = shrink(region, x, 1.0).lmo(g)
    assert np.all(v <= 1 - x + 1e-12) and region.contains(v)
