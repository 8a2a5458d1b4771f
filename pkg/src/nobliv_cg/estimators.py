"""Unbiased gradient, Hessian and gradient-difference estimators.

The central object is the path-integral estimate of ``grad F(x_cur) -
grad F(x_prev)``: draw ``a ~ U[0, 1]``, sample ``z`` at
``x(a) = a x_cur + (1 - a) x_prev`` and apply an unbiased Hessian estimate at
``x(a)`` to the displacement.  The Hessian action is either exact (objective
supplies Hessian-vector actions) or a central finite difference of gradients.

Objectives may override the generic estimators by defining
``anchor_gradient_samples(x, n, gen)`` and
``path_delta_samples(x_prev, x_cur, n, gen)``, each returning an ``(n, dim)``
array of per-sample estimates.  The multilinear extension does this.

Batch means are formed from per-chunk sums reduced in chunk order, so the
result does not depend on the number of worker threads.
"""
from dataclasses import dataclass, field
import math

import numpy as np

from ._random import as_stream, map_chunks
from .exceptions import EmptyBatchError, InvalidParameterError, UnsupportedOperationError
from .problems import StochasticSample, concat_payloads, lbar
from .validation import check_count, check_positive, check_vector


# ---------------------------------------------------------------------------
# Hessian-vector method
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class HvpMethod:
    """How the Hessian estimate is applied to a displacement.

    ``kind`` is ``"exact"`` (second-order actions of the objective), ``"fd"``
    (central finite differences with step ``delta``) or ``"auto"`` (exact when
    the objective has second-order actions, else finite differences).
    """

    kind: str = "auto"
    delta: float = None

    def __post_init__(self):
        if self.kind not in ("exact", "fd", "auto"):
            raise InvalidParameterError(f"unknown hvp method {self.kind!r}")
        if self.kind == "fd" and self.delta is not None:
            check_positive(self.delta, "delta")

    def resolve(self, obj, default_delta=None):
        """Concrete method for ``obj``; fills in ``delta`` when it is missing."""
        kind = self.kind
        if kind == "auto":
            kind = "exact" if obj.has_second_order else "fd"
        if kind == "exact":
            return HvpMethod("exact")
        delta = self.delta if self.delta is not None else default_delta
        if delta is None:
            raise InvalidParameterError("finite-difference HVP needs a delta")
        return HvpMethod("fd", check_positive(delta, "delta"))


def ExactSecondOrder():
    return HvpMethod("exact")


def FiniteDifference(delta):
    return HvpMethod("fd", check_positive(delta, "delta"))


def default_delta(profile, epsilon, T):
    """Finite-difference step ``Lbar eps^2 / (16 D L2 sqrt(1 + eps T) + 1)``."""
    Lb = lbar(profile)
    return Lb * epsilon**2 / (16.0 * profile.D * profile.L2 * math.sqrt(1.0 + epsilon * T) + 1.0)


def delta_is_small(profile, delta, epsilon, T, M):
    """Whether ``delta`` keeps the finite-difference bias below the rate's budget."""
    Lb, D, L2 = lbar(profile), profile.D, profile.L2
    lhs = 4 * delta * (D**3 * L2 * Lb * epsilon / math.sqrt(M)
                       + D**3 * L2 * math.sqrt(1 + epsilon * (T - 1)) * Lb * epsilon
                       + D**4 * L2**2 * delta)
    return lhs <= Lb**2 * D**2 * epsilon**3 / 2


# ---------------------------------------------------------------------------
# Single-sample building blocks
# ---------------------------------------------------------------------------

def _rows(X, dim):
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[1] != dim:
        raise InvalidParameterError(f"points have dimension {X.shape[1]}, expected {dim}")
    return X


def hessian_estimate(obj, y, z):
    """Five-term unbiased estimate of ``hess F(y)`` from realisations ``z``.

    ``F~ s s' + grad F~ s' + s grad F~' + hess F~ + F~ hess log p`` with
    ``s = grad log p(z; y)``.  ``y`` may be one point or one row per sample;
    a single point with a single sample returns a ``(dim, dim)`` matrix.
    """
    single = np.ndim(y) == 1 and len(z) == 1
    Y = _rows(y, obj.dim)
    if Y.shape[0] == 1 and len(z) > 1:
        Y = np.broadcast_to(Y, (len(z), obj.dim)).copy()
    if not obj.has_second_order:
        raise UnsupportedOperationError(
            f"{type(obj).__name__} has no second-order oracles; use xi_delta")
    f, s, gf = z.value, z.logp_grad, z.grad
    H = (f[:, None, None] * s[:, :, None] * s[:, None, :]
         + gf[:, :, None] * s[:, None, :] + s[:, :, None] * gf[:, None, :]
         + obj.hessian(Y, z.payload) + f[:, None, None] * obj.logp_hessian(Y, z.payload))
    return H[0] if single else H


def score_gradient_rows(obj, X, z):
    """Per-sample score-function gradients ``F~ grad log p + grad F~``."""
    return z.value[:, None] * z.logp_grad + z.grad


def _rank_one_terms(z, D):
    f, s, gf = z.value, z.logp_grad, z.grad
    sd = np.einsum("ki,ki->k", s, D)
    gd = np.einsum("ki,ki->k", gf, D)
    return (f * sd)[:, None] * s + sd[:, None] * gf + gd[:, None] * s


def _exact_rows(obj, X, z, D):
    if not obj.has_second_order:
        raise UnsupportedOperationError(
            f"{type(obj).__name__} has no second-order oracles; use xi_delta")
    return (_rank_one_terms(z, D) + obj.hvp(X, z.payload, D)
            + z.value[:, None] * obj.logp_hvp(X, z.payload, D))


def _fd_rows(obj, X, z, D, delta):
    Xp, Xm = X + delta * D, X - delta * D
    dgrad = (obj.grad(Xp, z.payload) - obj.grad(Xm, z.payload)) / (2 * delta)
    dlogp = (obj.logp_grad(Xp, z.payload) - obj.logp_grad(Xm, z.payload)) / (2 * delta)
    return _rank_one_terms(z, D) + dgrad + z.value[:, None] * dlogp


def hvp_fd(grad_oracle, y, d_vec, delta):
    """Central difference ``(grad(y + delta d) - grad(y - delta d)) / (2 delta)``."""
    delta = check_positive(delta, "delta")
    y = np.asarray(y, dtype=float)
    d_vec = np.asarray(d_vec, dtype=float)
    return (np.asarray(grad_oracle(y + delta * d_vec), dtype=float)
            - np.asarray(grad_oracle(y - delta * d_vec), dtype=float)) / (2 * delta)


# ---------------------------------------------------------------------------
# Path samples
# ---------------------------------------------------------------------------

@dataclass
class PathSample:
    a: float
    x_of_a: np.ndarray
    z: StochasticSample


@dataclass
class PathBatch:
    """Vectorised list of :class:`PathSample` along one segment."""

    x_prev: np.ndarray
    x_cur: np.ndarray
    a: np.ndarray
    X: np.ndarray
    z: StochasticSample

    def __len__(self):
        return self.a.shape[0]

    def __getitem__(self, k):
        return PathSample(float(self.a[k]), self.X[k], self.z[k])

    def __iter__(self):
        return (self[k] for k in range(len(self)))


def _draw_path(obj, x_prev, x_cur, size, gen):
    a = gen.random(size)
    X = a[:, None] * x_cur + (1.0 - a[:, None]) * x_prev
    return a, X, obj.draw(X, gen)


def sample_path_batch(obj, x_prev, x_cur, m, rng=None):
    """Draw ``m`` tuples ``(a, z)`` with ``a ~ U[0,1]`` and ``z ~ p(z; x(a))``."""
    x_prev = check_vector(x_prev, obj.dim, "x_prev")
    x_cur = check_vector(x_cur, obj.dim, "x_cur")
    m = check_count(m, "m")
    parts = map_chunks(lambda size, gen: _draw_path(obj, x_prev, x_cur, size, gen),
                       m, as_stream(rng))
    a = np.concatenate([p[0] for p in parts])
    X = np.concatenate([p[1] for p in parts])
    zs = [p[2] for p in parts]
    z = StochasticSample(concat_payloads([s.payload for s in zs]),
                         np.concatenate([s.value for s in zs]),
                         np.concatenate([s.grad for s in zs]),
                         np.concatenate([s.logp_grad for s in zs]),
                         zs[0].has_second_order)
    return PathBatch(x_prev, x_cur, a, X, z)


def _as_batch(batch):
    if isinstance(batch, PathBatch):
        return batch
    batch = list(batch)
    if not batch:
        raise EmptyBatchError("empty path batch")
    zs = [p.z for p in batch]
    z = StochasticSample(concat_payloads([s.payload for s in zs]),
                         np.concatenate([s.value for s in zs]),
                         np.concatenate([s.grad for s in zs]),
                         np.concatenate([s.logp_grad for s in zs]),
                         zs[0].has_second_order)
    a = np.array([p.a for p in batch], dtype=float)
    X = np.stack([np.asarray(p.x_of_a, dtype=float) for p in batch])
    return PathBatch(None, None, a, X, z)


def _batch_rows(obj, batch, d_vec, rows_fn):
    batch = _as_batch(batch)
    if len(batch) == 0:
        raise EmptyBatchError("empty path batch")
    d_vec = check_vector(d_vec, obj.dim, "d_vec")
    D = np.broadcast_to(d_vec, batch.X.shape)
    return rows_fn(batch.X, batch.z, D)


def delta_exact(obj, batch, d_vec):
    """Batch mean of the Hessian estimates at ``x(a)`` applied to ``d_vec``."""
    rows = _batch_rows(obj, batch, d_vec, lambda X, z, D: _exact_rows(obj, X, z, D))
    return rows.sum(axis=0) / rows.shape[0]


def xi_delta(obj, batch, d_vec, delta):
    """As :func:`delta_exact` with the two Hessian actions replaced by central differences."""
    delta = check_positive(delta, "delta")
    rows = _batch_rows(obj, batch, d_vec, lambda X, z, D: _fd_rows(obj, X, z, D, delta))
    return rows.sum(axis=0) / rows.shape[0]


# ---------------------------------------------------------------------------
# Streaming estimators used by the solvers
# ---------------------------------------------------------------------------

def _anchor_chunk(obj, x, size, gen):
    hook = getattr(obj, "anchor_gradient_samples", None)
    if hook is not None:
        return hook(x, size, gen)
    X = np.broadcast_to(x, (size, obj.dim)).copy()
    return score_gradient_rows(obj, X, obj.draw(X, gen))


def _path_chunk(obj, x_prev, x_cur, size, gen, method):
    hook = getattr(obj, "path_delta_samples", None)
    if hook is not None:
        return hook(x_prev, x_cur, size, gen)
    a, X, z = _draw_path(obj, x_prev, x_cur, size, gen)
    D = np.broadcast_to(x_cur - x_prev, X.shape)
    if method.kind == "exact":
        return _exact_rows(obj, X, z, D)
    return _fd_rows(obj, X, z, D, method.delta)


def _resolve(obj, hvp):
    if getattr(obj, "path_delta_samples", None) is not None:
        return None
    if isinstance(hvp, str):
        hvp = HvpMethod(hvp)
    return (hvp or HvpMethod()).resolve(obj)


def anchor_gradient_samples(obj, x, m, rng=None):
    """``(m, dim)`` per-sample unbiased gradient estimates at ``x``."""
    x = check_vector(x, obj.dim)
    m = check_count(m, "m")
    return np.concatenate(map_chunks(lambda s, g: _anchor_chunk(obj, x, s, g), m, as_stream(rng)))


def path_delta_samples(obj, x_prev, x_cur, m, rng=None, hvp=None):
    """``(m, dim)`` per-sample estimates of ``grad F(x_cur) - grad F(x_prev)``."""
    x_prev = check_vector(x_prev, obj.dim, "x_prev")
    x_cur = check_vector(x_cur, obj.dim, "x_cur")
    m = check_count(m, "m")
    method = _resolve(obj, hvp)
    return np.concatenate(map_chunks(
        lambda s, g: _path_chunk(obj, x_prev, x_cur, s, g, method), m, as_stream(rng)))


def _chunked_mean(fn, m, stream):
    total = None
    for part in map_chunks(lambda s, g: fn(s, g).sum(axis=0), m, stream):
        total = part if total is None else total + part
    return total / m


def path_delta(obj, x_prev, x_cur, m, rng=None, hvp=None):
    """Minibatch estimate of ``grad F(x_cur) - grad F(x_prev)``."""
    x_prev = check_vector(x_prev, obj.dim, "x_prev")
    x_cur = check_vector(x_cur, obj.dim, "x_cur")
    m = check_count(m, "m")
    if not np.any(x_cur != x_prev):
        return np.zeros(obj.dim)
    method = _resolve(obj, hvp)
    return _chunked_mean(lambda s, g: _path_chunk(obj, x_prev, x_cur, s, g, method),
                         m, as_stream(rng))


@dataclass
class GradientEstimate:
    """Running gradient estimate ``g`` with its provenance."""

    g: np.ndarray
    anchor_iter: int = 0
    oracle_calls: int = 0
    n_updates: int = 0
    history: list = field(default=None, repr=False)


def anchor_gradient(obj, x, m, rng=None, anchor_iter=0, keep_history=False):
    """Fresh minibatch gradient estimate at ``x`` from ``m`` samples."""
    x = check_vector(x, obj.dim)
    m = check_count(m, "m")
    g = _chunked_mean(lambda s, gen: _anchor_chunk(obj, x, s, gen), m, as_stream(rng))
    return GradientEstimate(g, anchor_iter, m, 0, [g.copy()] if keep_history else None)


def update_gradient_estimate(est, delta_tilde, n_calls=0):
    """``g <- g + delta_tilde``; returns a new estimate."""
    delta_tilde = check_vector(delta_tilde, est.g.shape[0], "delta_tilde")
    history = None
    if est.history is not None:
        history = est.history + [delta_tilde.copy()]
    return GradientEstimate(est.g + delta_tilde, est.anchor_iter, est.oracle_calls + int(n_calls),
                            est.n_updates + 1, history)


def replay_history(est):
    """Re-sum a recorded anchor plus increments in their original order."""
    if est.history is None:
        raise InvalidParameterError("estimate was built without keep_history=True")
    g = est.history[0].copy()
    for inc in est.history[1:]:
        g = g + inc
    return g
