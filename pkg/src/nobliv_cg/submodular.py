"""Stochastic set functions and their multilinear extensions.

A stochastic set function is ``f(S) = E_gamma f_gamma(S)`` over a finite list
of equally likely scenarios ``gamma``.  Ground-set elements are the integers
``0 .. d-1``; sets are passed either as iterables of indices or as boolean
masks of length ``d``.  All evaluation routines are vectorised: a batch of sets
is a boolean ``(n, d)`` array and ``scen`` an ``(n,)`` integer array.

The multilinear extension ``F(x) = E_{S ~ Bernoulli(x)} f(S)`` is exposed as a
:class:`~nobliv_cg.problems.NonObliviousObjective` whose gradient and
gradient-difference estimators use pinned marginals and the four-set sparse
Hessian entries rather than score functions.
"""
from dataclasses import dataclass
import numpy as np

from ._random import as_stream
from .exceptions import InvalidParameterError, SizeLimitError, UnsupportedOperationError
from .lmo import CardinalityPolytope, PartitionMatroidPolytope
from .problems import NonObliviousObjective
from .validation import check_count, check_vector

MAX_ENUM = 20


def _check_enumerable(d):
    if d > MAX_ENUM:
        raise SizeLimitError(f"enumeration over 2^{d} subsets refused (limit d <= {MAX_ENUM})")


def _subset_masks(d, start=0, stop=None):
    idx = np.arange(start, (1 << d) if stop is None else stop, dtype=np.int64)
    return ((idx[:, None] >> np.arange(d)) & 1).astype(bool)


def _popcount(d):
    idx = np.arange(1 << d, dtype=np.int64)
    return sum((idx >> i) & 1 for i in range(d))


class StochasticSetFunction:
    """Equally likely scenarios ``f_gamma``; subclasses implement :meth:`evaluate`."""

    monotone = True

    def __init__(self, ground_size, n_scenarios):
        self.ground_size = check_count(ground_size, "ground_size")
        self.n_scenarios = check_count(n_scenarios, "n_scenarios")
        self._table = None

    def evaluate(self, S, scen):
        """``f_{scen[k]}(S[k])`` for each row of the boolean matrix ``S``."""
        raise NotImplementedError

    def mask(self, S):
        if isinstance(S, np.ndarray) and S.dtype == bool:
            if S.shape != (self.ground_size,):
                raise InvalidParameterError("set mask has the wrong length")
            return S
        m = np.zeros(self.ground_size, dtype=bool)
        idx = list(S)
        if idx:
            idx = np.asarray(idx, dtype=int)
            if idx.min() < 0 or idx.max() >= self.ground_size:
                raise InvalidParameterError("set element out of range")
            m[idx] = True
        return m

    def expected_batch(self, S):
        """Expected value ``f(S[k])`` for each row of ``S``."""
        S = np.atleast_2d(S).astype(bool)
        n, c = S.shape[0], self.n_scenarios
        vals = self.evaluate(np.repeat(S, c, axis=0), np.tile(np.arange(c), n))
        return vals.reshape(n, c).mean(axis=1)

    def expected(self, S):
        return float(self.expected_batch(self.mask(S)[None, :])[0])

    def __call__(self, S):
        return self.expected(S)

    def sample_scenarios(self, n, gen):
        return gen.integers(0, self.n_scenarios, size=n)

    @property
    def D_f(self):
        """``sqrt(E_gamma max_i f_gamma({i})^2)``."""
        d, c = self.ground_size, self.n_scenarios
        eye = np.eye(d, dtype=bool)
        single = self.evaluate(np.tile(eye, (c, 1)), np.repeat(np.arange(c), d)).reshape(c, d)
        return float(np.sqrt(np.mean(single.max(axis=1) ** 2)))

    def table(self):
        """Expected value of every subset, indexed by bitmask (bit ``i`` = element ``i``)."""
        if self._table is None:
            d = self.ground_size
            _check_enumerable(d)
            out = np.empty(1 << d)
            block = max(1, 2**16 // self.n_scenarios)
            for start in range(0, 1 << d, block):
                stop = min(start + block, 1 << d)
                out[start:stop] = self.expected_batch(_subset_masks(d, start, stop))
            self._table = out
        return self._table


class WeightedCoverage(StochasticSetFunction):
    """``f_gamma(S) = sum of weights[gamma, u] over items u covered by S``.

    ``cover`` is a boolean ``(d, m)`` incidence matrix.  Monotone submodular.
    """

    def __init__(self, cover, weights):
        cover = np.atleast_2d(np.asarray(cover, dtype=bool))
        weights = np.atleast_2d(np.asarray(weights, dtype=float))
        if weights.shape[1] != cover.shape[1]:
            raise InvalidParameterError("weights need one column per item")
        if np.any(weights < 0):
            raise InvalidParameterError("coverage weights must be nonnegative")
        super().__init__(cover.shape[0], weights.shape[0])
        self.cover, self.weights = cover, weights

    def evaluate(self, S, scen):
        covered = (S.astype(np.float64) @ self.cover) > 0
        return np.einsum("km,km->k", covered, self.weights[scen])


class FacilityLocation(StochasticSetFunction):
    """``f_gamma(S) = sum_u max_{i in S} weights[gamma, u, i]`` (0 for empty ``S``)."""

    def __init__(self, weights):
        weights = np.asarray(weights, dtype=float)
        if weights.ndim == 2:
            weights = weights[None]
        if np.any(weights < 0):
            raise InvalidParameterError("facility weights must be nonnegative")
        super().__init__(weights.shape[2], weights.shape[0])
        self.weights = weights

    def evaluate(self, S, scen):
        W = self.weights[scen]
        return np.where(S[:, None, :], W, 0.0).max(axis=2).sum(axis=1)


class DirectedCut(StochasticSetFunction):
    """``f_gamma(S) = sum_{i in S, j not in S} weights[gamma, i, j]``.  Non-monotone."""

    monotone = False

    def __init__(self, weights):
        weights = np.asarray(weights, dtype=float)
        if weights.ndim == 2:
            weights = weights[None]
        if weights.shape[1] != weights.shape[2] or np.any(weights < 0):
            raise InvalidParameterError("cut weights must be nonnegative square matrices")
        super().__init__(weights.shape[1], weights.shape[0])
        self.weights = weights

    def evaluate(self, S, scen):
        Sf = S.astype(np.float64)
        return np.einsum("ki,kij,kj->k", Sf, self.weights[scen], 1.0 - Sf)


class Modular(StochasticSetFunction):
    """``f_gamma(S) = sum_{i in S} weights[gamma, i]``."""

    def __init__(self, weights):
        weights = np.atleast_2d(np.asarray(weights, dtype=float))
        if np.any(weights < 0):
            raise InvalidParameterError("modular weights must be nonnegative")
        super().__init__(weights.shape[1], weights.shape[0])
        self.weights = weights

    def evaluate(self, S, scen):
        return np.einsum("ki,ki->k", S.astype(np.float64), self.weights[scen])


# -- random instances -------------------------------------------------------

def random_coverage(d, n_items=None, n_scenarios=8, p_cover=0.3, rng=None):
    gen = as_stream(rng).generator()
    n_items = 2 * d if n_items is None else n_items
    cover = gen.random((d, n_items)) < p_cover
    cover[np.arange(d), gen.integers(0, n_items, size=d)] = True
    weights = gen.random((n_scenarios, n_items))
    return WeightedCoverage(cover, weights)


def random_facility_location(d, n_customers=None, n_scenarios=8, rng=None):
    gen = as_stream(rng).generator()
    n_customers = 2 * d if n_customers is None else n_customers
    return FacilityLocation(gen.random((n_scenarios, n_customers, d)))


def random_directed_cut(d, n_scenarios=8, density=0.5, rng=None):
    gen = as_stream(rng).generator()
    W = gen.random((n_scenarios, d, d)) * (gen.random((n_scenarios, d, d)) < density)
    W[:, np.arange(d), np.arange(d)] = 0.0
    return DirectedCut(W)


def random_modular(d, n_scenarios=8, rng=None):
    gen = as_stream(rng).generator()
    return Modular(gen.random((n_scenarios, d)))


# ---------------------------------------------------------------------------
# Matroid constraints
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Cardinality:
    k: int
    d: int

    @property
    def rank(self):
        return self.k

    def independent_mask(self):
        return _popcount(self.d) <= self.k

    def is_independent(self, mask):
        return int(np.sum(mask)) <= self.k

    def polytope(self):
        return CardinalityPolytope(self.k, self.d)


@dataclass(frozen=True)
class Partition:
    blocks: tuple
    caps: tuple

    @property
    def d(self):
        return sum(len(b) for b in self.blocks)

    @property
    def rank(self):
        return sum(min(c, len(b)) for b, c in zip(self.blocks, self.caps))

    def independent_mask(self):
        idx = np.arange(1 << self.d, dtype=np.int64)
        ok = np.ones(idx.size, dtype=bool)
        for block, cap in zip(self.blocks, self.caps):
            ok &= sum((idx >> i) & 1 for i in block) <= cap
        return ok

    def is_independent(self, mask):
        return all(int(np.sum(np.asarray(mask)[list(b)])) <= c
                   for b, c in zip(self.blocks, self.caps))

    def polytope(self):
        return PartitionMatroidPolytope(self.blocks, self.caps)


def constraint_from_region(region):
    if isinstance(region, CardinalityPolytope):
        return Cardinality(region.k, region.dim)
    if isinstance(region, PartitionMatroidPolytope):
        return Partition(tuple(tuple(b.tolist()) for b in region.blocks), tuple(region.caps))
    raise InvalidParameterError(f"no matroid constraint for {type(region).__name__}")


# ---------------------------------------------------------------------------
# Exact multilinear extension (enumeration)
# ---------------------------------------------------------------------------

def _subset_probs(x):
    p = np.ones(1)
    for xi in x:
        p = np.concatenate((p * (1.0 - xi), p * xi))
    return p


def _pinned(f, x, pins):
    x = np.array(x, dtype=float)
    for i, v in pins.items():
        x[i] = v
    return float(_subset_probs(x) @ f.table())


def multilinear_value_exact(f, x):
    """``sum_S f(S) prod_{i in S} x_i prod_{j not in S} (1 - x_j)``."""
    _check_enumerable(f.ground_size)
    x = check_vector(x, f.ground_size)
    return float(_subset_probs(x) @ f.table())


def multilinear_grad_exact(f, x, i=None):
    """``F(x; x_i <- 1) - F(x; x_i <- 0)``; the full gradient when ``i`` is None."""
    _check_enumerable(f.ground_size)
    x = check_vector(x, f.ground_size)
    if i is None:
        return np.array([multilinear_grad_exact(f, x, j) for j in range(f.ground_size)])
    _check_index(f, i)
    return _pinned(f, x, {i: 1.0}) - _pinned(f, x, {i: 0.0})


def multilinear_hessian_entry_exact(f, x, i, j):
    """Four-pin alternating sum for ``i != j``; zero on the diagonal."""
    _check_enumerable(f.ground_size)
    x = check_vector(x, f.ground_size)
    _check_index(f, i)
    _check_index(f, j)
    if i == j:
        return 0.0
    return (_pinned(f, x, {i: 1.0, j: 1.0}) - _pinned(f, x, {i: 1.0, j: 0.0})
            - _pinned(f, x, {i: 0.0, j: 1.0}) + _pinned(f, x, {i: 0.0, j: 0.0}))


def multilinear_hessian_exact(f, x):
    d = f.ground_size
    H = np.zeros((d, d))
    for i in range(d):
        for j in range(i + 1, d):
            H[i, j] = H[j, i] = multilinear_hessian_entry_exact(f, x, i, j)
    return H


def _check_index(f, i):
    if not 0 <= int(i) < f.ground_size:
        raise IndexError(f"element {i} out of range for ground set of size {f.ground_size}")


# ---------------------------------------------------------------------------
# Multilinear extension as a non-oblivious objective
# ---------------------------------------------------------------------------

class MultilinearObjective(NonObliviousObjective):
    """``F(x) = E_{gamma, z ~ Bernoulli(x)} f_gamma(N(z))``.

    ``F~`` does not depend on ``x`` so every stochastic gradient is zero and
    curvature enters through the Bernoulli sampling distribution.  With
    ``exact=False`` the enumeration oracles are withheld, which forces the
    harness to estimate values and gaps by sampling.
    """

    has_second_order = False

    def __init__(self, f, exact=True):
        super().__init__(f.ground_size)
        self.f = f
        self.has_exact = bool(exact) and f.ground_size <= MAX_ENUM

    def sample(self, X, gen):
        Z = gen.random(X.shape) < X
        return Z, self.f.sample_scenarios(X.shape[0], gen)

    def value(self, X, payload):
        Z, scen = payload
        return self.f.evaluate(Z, scen)

    def grad(self, X, payload):
        return np.zeros_like(X)

    def logp_grad(self, X, payload):
        Z, _ = payload
        out = np.zeros_like(X)
        up, down = Z & (X > 0), ~Z & (X < 1)
        out[up] = 1.0 / X[up]
        out[down] = -1.0 / (1.0 - X[down])
        return out

    # -- specialised estimators -------------------------------------------
    def anchor_gradient_samples(self, x, n, gen):
        """Pinned marginals ``f_gamma(N(z) + i) - f_gamma(N(z) - i)`` per sample."""
        d = self.dim
        Z, scen = self.sample(np.broadcast_to(x, (n, d)), gen)
        eye = np.eye(d, dtype=bool)
        Zr = np.repeat(Z, d, axis=0)
        er = np.tile(eye, (n, 1))
        sc = np.repeat(scen, d)
        hi = self.f.evaluate(Zr | er, sc)
        lo = self.f.evaluate(Zr & ~er, sc)
        return (hi - lo).reshape(n, d)

    def path_delta_samples(self, x_prev, x_cur, n, gen):
        """Sparse Hessian-entry estimate applied to ``x_cur - x_prev`` per sample.

        Only columns where the displacement is nonzero are formed.
        """
        d = self.dim
        disp = x_cur - x_prev
        a = gen.random(n)
        Xa = a[:, None] * x_cur + (1.0 - a[:, None]) * x_prev
        S = gen.random((n, d)) <= Xa
        scen = self.f.sample_scenarios(n, gen)
        out = np.zeros((n, d))
        cols = np.flatnonzero(disp)
        if cols.size == 0:
            return out
        eye = np.tile(np.eye(d, dtype=bool), (n, 1))
        sc = np.repeat(scen, d)
        for j in cols:
            with_j, without_j = S.copy(), S.copy()
            with_j[:, j] = True
            without_j[:, j] = False
            wj, woj = np.repeat(with_j, d, axis=0), np.repeat(without_j, d, axis=0)
            H = (self.f.evaluate(wj | eye, sc) - self.f.evaluate(woj | eye, sc)
                 - self.f.evaluate(wj & ~eye, sc) + self.f.evaluate(woj & ~eye, sc)).reshape(n, d)
            H[:, j] = 0.0
            out += disp[j] * H
        return out

    # -- exact oracles ------------------------------------------------------
    def _require_exact(self):
        if not self.has_exact:
            raise UnsupportedOperationError("exact oracles disabled for this multilinear objective")

    def exact_value(self, x):
        self._require_exact()
        return multilinear_value_exact(self.f, x)

    def exact_grad(self, x):
        self._require_exact()
        x = check_vector(x, self.dim)
        p_table = self.f.table()
        g = np.empty(self.dim)
        for i in range(self.dim):
            hi, lo = x.copy(), x.copy()
            hi[i], lo[i] = 1.0, 0.0
            g[i] = _subset_probs(hi) @ p_table - _subset_probs(lo) @ p_table
        return g

    def exact_hessian(self, x):
        self._require_exact()
        return multilinear_hessian_exact(self.f, x)


def as_non_oblivious(f, exact=True):
    """Wrap ``f`` as the objective ``F(x) = E f_gamma(N(z))``, ``z ~ Bernoulli(x)``."""
    return MultilinearObjective(f, exact=exact)


def multilinear_anchor_gradient(f, x, m, rng=None):
    """Unbiased estimate of ``grad F(x)`` from ``m`` pinned-marginal samples."""
    from .estimators import anchor_gradient

    return anchor_gradient(as_non_oblivious(f, exact=False), x, m, rng).g


def multilinear_delta_estimate(f, x_prev, x_cur, m, rng=None):
    """Unbiased estimate of ``grad F(x_cur) - grad F(x_prev)`` from ``m`` samples."""
    from .estimators import path_delta

    return path_delta(as_non_oblivious(f, exact=False), x_prev, x_cur, m, rng)


# ---------------------------------------------------------------------------
# Brute force and rounding
# ---------------------------------------------------------------------------

def brute_force_opt(f, constraint):
    """Exhaustive ``max f(S)`` over independent sets.

    Ties go to the smallest set, then the lexicographically smallest.
    """
    d = f.ground_size
    _check_enumerable(d)
    if constraint.d != d:
        raise InvalidParameterError("constraint and set function disagree on ground size")
    vals = np.where(constraint.independent_mask(), f.table(), -np.inf)
    best = vals.max()
    ties = np.flatnonzero(np.isclose(vals, best, rtol=0.0, atol=1e-12))
    sets = [tuple(i for i in range(d) if (s >> i) & 1) for s in ties.tolist()]
    return frozenset(min(sets, key=lambda s: (len(s), s))), float(best)


def round_solution(x, constraint, f, mode="pipage", rng=None, tol=1e-9):
    """Round a fractional ``x`` in the matroid polytope to an independent set.

    ``"independent"`` keeps each ``i`` with probability ``x_i`` and then drops the
    element of lowest exact marginal until the set is independent.
    ``"pipage"`` (cardinality only) moves pairs of fractional coordinates to
    the better endpoint of their exchange line.
    """
    x = check_vector(x, f.ground_size)
    if mode == "independent":
        gen = as_stream(rng).generator()
        S = gen.random(x.size) < x
        S |= x >= 1.0 - tol
        S &= x > tol
        while not constraint.is_independent(S):
            members = np.flatnonzero(S)
            base = f.expected(S)
            marg = []
            for i in members:
                T = S.copy()
                T[i] = False
                marg.append(base - f.expected(T))
            S[members[int(np.argmin(marg))]] = False
        return frozenset(np.flatnonzero(S).tolist())
    if mode != "pipage":
        raise InvalidParameterError(f"unknown rounding mode {mode!r}")
    if not isinstance(constraint, Cardinality):
        raise UnsupportedOperationError("pipage rounding is implemented for cardinality constraints only")
    y = np.clip(x, 0.0, 1.0)
    y[y < tol] = 0.0
    y[y > 1 - tol] = 1.0
    _check_enumerable(f.ground_size)
    while True:
        frac = np.flatnonzero((y > 0) & (y < 1))
        if frac.size == 0:
            break
        if frac.size == 1:
            i = frac[0]
            cands = []
            up = y.copy()
            up[i] = 1.0
            if up.sum() <= constraint.k + tol:
                cands.append(up)
            down = y.copy()
            down[i] = 0.0
            cands.append(down)
        else:
            i, j = frac[0], frac[1]
            up = y.copy()
            s = min(1.0 - y[i], y[j])
            up[i] += s
            up[j] -= s
            down = y.copy()
            s = min(y[i], 1.0 - y[j])
            down[i] -= s
            down[j] += s
            cands = [up, down]
        vals = [multilinear_value_exact(f, c) for c in cands]
        y = cands[int(np.argmax(vals))]
        y[y < tol] = 0.0
        y[y > 1 - tol] = 1.0
    return frozenset(np.flatnonzero(y > 0.5).tolist())


def set_to_vector(S, d):
    v = np.zeros(d)
    v[list(S)] = 1.0
    return v


def coverage_fixture():
    """Two elements covering one shared unit-weight item: ``f({0}) = f({1}) = f({0,1}) = 1``."""
    return WeightedCoverage([[True], [True]], [[1.0]])


def cardinality_fixture(d):
    """``f(S) = |S|``."""
    return Modular(np.ones((1, d)))
