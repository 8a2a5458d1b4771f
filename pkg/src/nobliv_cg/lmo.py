"""Feasible regions with exact linear maximization oracles.

Every region returns a maximiser of ``<v, g>``.  Ties are broken towards the
lowest coordinate index and coordinates with zero gain sit at the region's
lower bound, so runs are bit-reproducible.  The polytopes built from
cardinality and partition constraints are solved by sorting (a capped
fractional knapsack), never by a general LP solver.
"""
import math

import numpy as np

from .exceptions import ConfigError, InfeasibleShrinkError, InvalidParameterError
from .validation import check_count, check_positive, check_vector


def _capped_knapsack(g, cap, budget):
    """Maximise ``<v, g>`` over ``0 <= v <= cap, sum(v) <= budget``.

    Coordinates are filled greedily by decreasing gain; equal gains prefer the
    larger cap, then the lower index.
    """
    v = np.zeros_like(g)
    if budget <= 0:
        return v
    idx = np.arange(g.size)
    order = np.lexsort((idx, -cap, -g))
    order = order[g[order] > 0]
    if order.size == 0:
        return v
    caps = cap[order]
    before = np.concatenate(([0.0], np.cumsum(caps)[:-1]))
    v[order] = np.clip(budget - before, 0.0, caps)
    return v


class FeasibleRegion:
    """A compact convex set accessed through its linear maximization oracle."""

    down_closed = False

    def __init__(self, dim):
        self.dim = check_count(dim, "dim")

    def lmo(self, g):
        g = check_vector(g, self.dim, "g")
        return self._lmo(g, None)

    def capped_lmo(self, g, cap):
        """LMO over ``{v in region : v <= cap}``."""
        g = check_vector(g, self.dim, "g")
        cap = check_vector(cap, self.dim, "cap")
        return self._lmo(g, np.maximum(cap, 0.0))

    def _lmo(self, g, cap):
        raise NotImplementedError

    def diameter(self):
        raise NotImplementedError

    def contains(self, x, tol=1e-9):
        raise NotImplementedError

    def bounding_box(self):
        raise NotImplementedError

    def to_dict(self):
        raise NotImplementedError


class Box(FeasibleRegion):
    """``{x : lower <= x <= upper}``."""

    def __init__(self, lower, upper, dim=None):
        if dim is None:
            dim = np.size(lower) if np.ndim(lower) else np.size(upper)
        super().__init__(dim)
        self.lower = check_vector(np.broadcast_to(np.asarray(lower, dtype=float), (self.dim,)),
                                  self.dim, "lower").copy()
        self.upper = check_vector(np.broadcast_to(np.asarray(upper, dtype=float), (self.dim,)),
                                  self.dim, "upper").copy()
        if np.any(self.lower > self.upper):
            raise InvalidParameterError("Box lower bound exceeds upper bound")
        self.down_closed = bool(np.all(self.lower == 0.0))

    def _lmo(self, g, cap):
        upper = self.upper if cap is None else np.minimum(self.upper, cap)
        if np.any(upper < self.lower):
            raise InfeasibleShrinkError("cap falls below the box lower bound")
        return np.where(g > 0, upper, self.lower)

    def diameter(self):
        return float(np.linalg.norm(self.upper - self.lower))

    def contains(self, x, tol=1e-9):
        x = check_vector(x, self.dim)
        return bool(np.all(x >= self.lower - tol) and np.all(x <= self.upper + tol))

    def bounding_box(self):
        return self.lower.copy(), self.upper.copy()

    def to_dict(self):
        return {"type": "box", "lower": self.lower.tolist(), "upper": self.upper.tolist()}

    def __repr__(self):
        return f"Box(lower={self.lower.tolist()}, upper={self.upper.tolist()})"


class ScaledSimplex(FeasibleRegion):
    """``{x >= 0 : sum(x) <= radius}``, the down-closed simplex."""

    down_closed = True

    def __init__(self, dim, radius=1.0):
        super().__init__(dim)
        self.radius = check_positive(radius, "radius")

    def _lmo(self, g, cap):
        cap = np.full(self.dim, self.radius) if cap is None else np.minimum(cap, self.radius)
        return _capped_knapsack(g, cap, self.radius)

    def diameter(self):
        return self.radius * (math.sqrt(2.0) if self.dim >= 2 else 1.0)

    def contains(self, x, tol=1e-9):
        x = check_vector(x, self.dim)
        return bool(np.all(x >= -tol) and x.sum() <= self.radius + tol)

    def bounding_box(self):
        return np.zeros(self.dim), np.full(self.dim, self.radius)

    def to_dict(self):
        return {"type": "simplex", "dim": self.dim, "radius": self.radius}

    def __repr__(self):
        return f"ScaledSimplex(dim={self.dim}, radius={self.radius})"


class CardinalityPolytope(FeasibleRegion):
    """``{0 <= x <= 1 : sum(x) <= k}``, the uniform matroid polytope."""

    down_closed = True

    def __init__(self, k, dim):
        super().__init__(dim)
        self.k = check_count(k, "k", minimum=0)
        if self.k > self.dim:
            raise InvalidParameterError(f"k={self.k} exceeds dim={self.dim}")

    def _lmo(self, g, cap):
        cap = np.ones(self.dim) if cap is None else np.minimum(cap, 1.0)
        return _capped_knapsack(g, cap, float(self.k))

    def diameter(self):
        """``sqrt(2k)`` when two disjoint ``k``-sets fit, else ``sqrt(dim)``."""
        return math.sqrt(2 * self.k) if 2 * self.k <= self.dim else math.sqrt(self.dim)

    def contains(self, x, tol=1e-9):
        x = check_vector(x, self.dim)
        return bool(np.all(x >= -tol) and np.all(x <= 1 + tol) and x.sum() <= self.k + tol)

    def bounding_box(self):
        return np.zeros(self.dim), np.ones(self.dim)

    def to_dict(self):
        return {"type": "cardinality", "dim": self.dim, "k": self.k}

    def __repr__(self):
        return f"CardinalityPolytope(k={self.k}, dim={self.dim})"


class PartitionMatroidPolytope(FeasibleRegion):
    """``{0 <= x <= 1 : sum(x[block_b]) <= caps[b]}`` for a partition of the coordinates."""

    down_closed = True

    def __init__(self, blocks, caps):
        blocks = [np.asarray(b, dtype=int) for b in blocks]
        flat = np.concatenate(blocks) if blocks else np.array([], dtype=int)
        super().__init__(flat.size)
        if sorted(flat.tolist()) != list(range(self.dim)):
            raise InvalidParameterError("blocks must partition 0..dim-1")
        if len(caps) != len(blocks):
            raise InvalidParameterError("need one cap per block")
        self.blocks = blocks
        self.caps = [check_count(c, "cap", minimum=0) for c in caps]

    def _lmo(self, g, cap):
        cap = np.ones(self.dim) if cap is None else np.minimum(cap, 1.0)
        v = np.zeros(self.dim)
        for block, c in zip(self.blocks, self.caps):
            v[block] = _capped_knapsack(g[block], cap[block], float(c))
        return v

    def diameter(self):
        return math.sqrt(sum(min(2 * c, b.size) for b, c in zip(self.blocks, self.caps)))

    def contains(self, x, tol=1e-9):
        x = check_vector(x, self.dim)
        if np.any(x < -tol) or np.any(x > 1 + tol):
            return False
        return all(x[b].sum() <= c + tol for b, c in zip(self.blocks, self.caps))

    def bounding_box(self):
        return np.zeros(self.dim), np.ones(self.dim)

    def to_dict(self):
        return {"type": "partition", "blocks": [b.tolist() for b in self.blocks],
                "caps": list(self.caps)}

    def __repr__(self):
        return f"PartitionMatroidPolytope(blocks={[b.tolist() for b in self.blocks]}, caps={self.caps})"


class Shrunk(FeasibleRegion):
    """``{v in base : v <= cap}``; the per-step region of measured continuous greedy."""

    def __init__(self, base, cap):
        super().__init__(base.dim)
        self.base = base
        self.cap = check_vector(cap, self.dim, "cap")
        if np.any(self.cap < 0):
            raise InfeasibleShrinkError("shrink cap must be nonnegative")
        self.down_closed = base.down_closed

    def _lmo(self, g, cap):
        cap = self.cap if cap is None else np.minimum(cap, self.cap)
        return self.base._lmo(g, cap)

    def diameter(self):
        return self.base.diameter()

    def contains(self, x, tol=1e-9):
        x = check_vector(x, self.dim)
        return self.base.contains(x, tol) and bool(np.all(x <= self.cap + tol))

    def bounding_box(self):
        lo, hi = self.base.bounding_box()
        return lo, np.minimum(hi, self.cap)

    def to_dict(self):
        return {"type": "shrunk", "base": self.base.to_dict(), "cap": self.cap.tolist()}


def lmo(region, g):
    return region.lmo(g)


def shrink(region, x, ubar, tol=1e-9):
    """Region whose LMO maximises over ``{v in region : v <= ubar - x}``."""
    x = check_vector(x, region.dim)
    ubar = check_vector(np.broadcast_to(np.asarray(ubar, dtype=float), (region.dim,)),
                        region.dim, "ubar")
    if np.any(x > ubar + tol):
        raise InfeasibleShrinkError("iterate exceeds ubar; cannot shrink")
    return Shrunk(region, np.maximum(ubar - x, 0.0))


def diameter(region):
    return region.diameter()


def contains(region, x, tol=1e-9):
    return region.contains(x, tol)


def region_from_dict(spec, dim=None):
    """Build a region from its JSON descriptor (``type`` plus parameters)."""
    try:
        kind = spec["type"]
        if kind == "box":
            return Box(spec.get("lower", 0.0), spec.get("upper", 1.0), dim=spec.get("dim", dim))
        if kind == "simplex":
            return ScaledSimplex(spec.get("dim", dim), spec.get("radius", 1.0))
        if kind == "cardinality":
            return CardinalityPolytope(spec["k"], spec.get("dim", dim))
        if kind == "partition":
            return PartitionMatroidPolytope(spec["blocks"], spec["caps"])
        if kind == "shrunk":
            return Shrunk(region_from_dict(spec["base"], dim), spec["cap"])
    except KeyError as exc:
        raise ConfigError(f"region descriptor missing field {exc}") from None
    except TypeError as exc:
        raise ConfigError(f"bad region descriptor: {exc}") from None
    raise ConfigError(f"unknown region type {spec.get('type')!r}")
