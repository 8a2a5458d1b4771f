"""Non-oblivious stochastic objectives ``F(x) = E_{z ~ p(z; x)} F~(x; z)``.

An objective is a sampler for ``z`` given the decision point plus the per-sample
oracles needed by the gradient and Hessian estimators: ``F~``, ``grad_x F~``,
``grad_x log p`` and, when available, the Hessian-vector actions of ``F~`` and
``log p``.  All oracles are vectorised over a leading sample axis; row ``k`` of
``X`` is the point at which sample ``k`` was drawn.

Test families additionally expose closed-form ``exact_value``/``exact_grad``/
``exact_hessian`` so that Monte-Carlo quantities can be checked against the
analytic truth.
"""
from dataclasses import dataclass, field
import math

import numpy as np

from ._random import as_stream, map_chunks
from .exceptions import InvalidParameterError, InvalidProfileError, UnsupportedOperationError
from .validation import check_count, check_positive, check_vector


@dataclass(frozen=True)
class SmoothnessProfile:
    """Problem constants used to set step sizes and batch sizes.

    ``B`` bounds ``F~``; ``G`` bounds the stochastic gradient and the fourth
    moment of the score; ``L`` bounds the stochastic Hessians; ``L2`` is the
    Hessian Lipschitz constant and ``D`` the diameter of the feasible region.
    ``Lbar`` overrides the derived variance constant when given.
    """

    B: float
    G: float
    L: float
    L2: float = 1.0
    D: float = 1.0
    Lbar: float = None

    def __post_init__(self):
        for name in ("B", "G", "D"):
            value = getattr(self, name)
            if not (np.isfinite(value) and value > 0):
                raise InvalidProfileError(f"{name} must be > 0, got {value}")
        for name in ("L", "L2"):
            value = getattr(self, name)
            if not (np.isfinite(value) and value >= 0):
                raise InvalidProfileError(f"{name} must be >= 0, got {value}")
        if self.Lbar is not None and not (np.isfinite(self.Lbar) and self.Lbar > 0):
            raise InvalidProfileError(f"Lbar must be > 0, got {self.Lbar}")

    def replace(self, **changes):
        params = dict(B=self.B, G=self.G, L=self.L, L2=self.L2, D=self.D, Lbar=self.Lbar)
        params.update(changes)
        return SmoothnessProfile(**params)


def lbar(profile):
    """Second-moment bound of the Hessian estimator's spectral norm.

    ``sqrt(4 B^2 G^4 + 16 G^4 + 4 L^2 + 4 B^2 L^2)``, or ``profile.Lbar`` when set.
    """
    if profile.Lbar is not None:
        return float(profile.Lbar)
    B, G, L = profile.B, profile.G, profile.L
    return math.sqrt(4 * B**2 * G**4 + 16 * G**4 + 4 * L**2 + 4 * B**2 * L**2)


@dataclass
class StochasticSample:
    """A batch of realisations ``z`` with the first-order quantities at their points."""

    payload: object
    value: np.ndarray
    grad: np.ndarray
    logp_grad: np.ndarray
    has_second_order: bool = True

    def __len__(self):
        return self.value.shape[0]

    def __getitem__(self, idx):
        idx = np.atleast_1d(np.arange(len(self))[idx])
        return StochasticSample(take_payload(self.payload, idx), self.value[idx],
                                self.grad[idx], self.logp_grad[idx], self.has_second_order)


def take_payload(payload, idx):
    if payload is None:
        return None
    if isinstance(payload, tuple):
        return tuple(take_payload(p, idx) for p in payload)
    return np.asarray(payload)[idx]


def concat_payloads(payloads):
    first = payloads[0]
    if first is None:
        return None
    if isinstance(first, tuple):
        return tuple(concat_payloads([p[i] for p in payloads]) for i in range(len(first)))
    return np.concatenate(payloads, axis=0)


class NonObliviousObjective:
    """Base class for ``F(x) = E_{z ~ p(z; x)} F~(x; z)``.

    Subclasses implement :meth:`sample`, :meth:`value`, :meth:`grad` and
    :meth:`logp_grad`; second-order actions and exact oracles are optional.
    Instances are immutable after construction.
    """

    has_second_order = False
    has_exact = False

    def __init__(self, dim):
        self.dim = check_count(dim, "dim")

    # -- sampling -------------------------------------------------------
    def sample(self, X, gen):
        """Draw one ``z ~ p(z; X[k])`` per row of ``X``."""
        raise NotImplementedError

    def value(self, X, payload):
        raise NotImplementedError

    def grad(self, X, payload):
        raise NotImplementedError

    def logp_grad(self, X, payload):
        raise NotImplementedError

    def hvp(self, X, payload, D):
        """Row-wise ``hess_x F~(X[k]; z_k) @ D[k]``."""
        raise UnsupportedOperationError(f"{type(self).__name__} has no Hessian action for F~")

    def logp_hvp(self, X, payload, D):
        """Row-wise ``hess_x log p(z_k; X[k]) @ D[k]``."""
        raise UnsupportedOperationError(f"{type(self).__name__} has no Hessian action for log p")

    def hessian(self, X, payload):
        return _materialize(self.hvp, X, payload)

    def logp_hessian(self, X, payload):
        return _materialize(self.logp_hvp, X, payload)

    def draw(self, X, gen):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        payload = self.sample(X, gen)
        return StochasticSample(payload, self.value(X, payload), self.grad(X, payload),
                                self.logp_grad(X, payload), self.has_second_order)

    # -- exact oracles (test families only) -----------------------------
    def exact_value(self, x):
        raise UnsupportedOperationError(f"{type(self).__name__} has no exact value oracle")

    def exact_grad(self, x):
        raise UnsupportedOperationError(f"{type(self).__name__} has no exact gradient oracle")

    def exact_hessian(self, x):
        raise UnsupportedOperationError(f"{type(self).__name__} has no exact Hessian oracle")

    def exact_optimum(self, region):
        """Return ``(x*, F(x*))`` over ``region`` when it is known in closed form."""
        return None

    def _rows(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        return X


def _materialize(action, X, payload):
    X = np.atleast_2d(np.asarray(X, dtype=float))
    n, d = X.shape
    out = np.empty((n, d, d))
    for j in range(d):
        E = np.zeros((n, d))
        E[:, j] = 1.0
        out[:, :, j] = action(X, payload, E)
    return out


# ---------------------------------------------------------------------------
# Gaussian location family: p(z; x) = N(x, sigma^2 I), F~(x; z) = phi(z)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class NegHalfSqNorm:
    """Payoff ``phi(z) = -||z||^2 / 2``."""


@dataclass(frozen=True)
class Quadratic:
    """Payoff ``phi(z) = -z'Az/2 + b'z`` with symmetric ``A``."""

    A: np.ndarray = field(compare=False)
    b: np.ndarray = field(compare=False)


class GaussianFamily(NonObliviousObjective):
    """``z ~ N(x, sigma^2 I)`` with a payoff that depends on ``z`` only.

    Because ``F~`` ignores ``x``, every bit of curvature in ``F`` comes from the
    sampling distribution; this is the purest non-oblivious case.
    """

    has_second_order = True
    has_exact = True

    def __init__(self, dim, sigma, payoff=None):
        super().__init__(dim)
        self.sigma = check_positive(sigma, "sigma")
        payoff = NegHalfSqNorm() if payoff is None else payoff
        if isinstance(payoff, NegHalfSqNorm):
            A, b = np.eye(self.dim), np.zeros(self.dim)
        elif isinstance(payoff, Quadratic):
            A = np.asarray(payoff.A, dtype=float)
            b = check_vector(payoff.b, self.dim, "b")
            if A.shape != (self.dim, self.dim) or not np.allclose(A, A.T):
                raise InvalidParameterError("A must be a symmetric dim x dim matrix")
        else:
            raise InvalidParameterError(f"unknown payoff {payoff!r}")
        self.payoff = payoff
        self.A, self.b = A, b

    def sample(self, X, gen):
        return X + self.sigma * gen.standard_normal(X.shape)

    def value(self, X, Z):
        return -0.5 * np.einsum("ki,ij,kj->k", Z, self.A, Z) + Z @ self.b

    def grad(self, X, Z):
        return np.zeros_like(X)

    def logp_grad(self, X, Z):
        return (Z - X) / self.sigma**2

    def hvp(self, X, Z, D):
        return np.zeros_like(D)

    def logp_hvp(self, X, Z, D):
        return -D / self.sigma**2

    def exact_value(self, x):
        x = check_vector(x, self.dim)
        return float(-0.5 * x @ self.A @ x + self.b @ x - 0.5 * self.sigma**2 * np.trace(self.A))

    def exact_grad(self, x):
        x = check_vector(x, self.dim)
        return -self.A @ x + self.b

    def exact_hessian(self, x):
        return -self.A.copy()

    def exact_optimum(self, region):
        return _box_clip_optimum(self, region, self.A, self.b)


def make_gaussian_family(dim, sigma, payoff=None):
    """Gaussian location family with closed-form ``F``, ``grad F`` and ``hess F``.

    For the default payoff ``-||z||^2/2``: ``F(x) = -||x||^2/2 - dim*sigma^2/2``.
    """
    return GaussianFamily(dim, sigma, payoff)


def gaussian_profile(family, region, radius=3.0, L2=1e-6):
    """Smoothness constants for a :class:`GaussianFamily` over ``region``.

    ``F~`` is unbounded under a Gaussian, so ``B`` is taken over the region
    dilated by ``radius`` standard deviations per coordinate.
    """
    d, s = family.dim, family.sigma
    lo, hi = region.bounding_box()
    reach = np.maximum(np.abs(lo), np.abs(hi)) + radius * s
    B = 0.5 * np.linalg.norm(family.A, 2) * float(reach @ reach) + float(np.abs(family.b) @ reach)
    G = (d * d + 2.0 * d) ** 0.25 / s
    L = 1.0 / s**2
    return SmoothnessProfile(B=max(B, 1e-12), G=G, L=L, L2=L2, D=region.diameter())


# ---------------------------------------------------------------------------
# Smooth nonconvex family
# ---------------------------------------------------------------------------

class SinusoidFamily(NonObliviousObjective):
    """``z ~ N(x, sigma^2 I)``, ``F~(x; z) = sum_i sin(omega z_i) - lam ||x||^2 / 2``.

    Both ``F~`` and ``log p`` depend on ``x``, so all five Hessian-estimator
    terms are active.  In closed form
    ``F(x) = exp(-omega^2 sigma^2 / 2) sum_i sin(omega x_i) - lam ||x||^2 / 2``.
    """

    has_second_order = True
    has_exact = True

    def __init__(self, dim, sigma=1.0, omega=1.0, lam=0.0):
        super().__init__(dim)
        self.sigma = check_positive(sigma, "sigma")
        self.omega = check_positive(omega, "omega")
        self.lam = check_positive(lam, "lam", strict=False)
        self._damp = math.exp(-0.5 * (self.omega * self.sigma) ** 2)

    def sample(self, X, gen):
        return X + self.sigma * gen.standard_normal(X.shape)

    def value(self, X, Z):
        return np.sin(self.omega * Z).sum(axis=1) - 0.5 * self.lam * np.einsum("ki,ki->k", X, X)

    def grad(self, X, Z):
        return -self.lam * X

    def logp_grad(self, X, Z):
        return (Z - X) / self.sigma**2

    def hvp(self, X, Z, D):
        return -self.lam * D

    def logp_hvp(self, X, Z, D):
        return -D / self.sigma**2

    def exact_value(self, x):
        x = check_vector(x, self.dim)
        return float(self._damp * np.sin(self.omega * x).sum() - 0.5 * self.lam * x @ x)

    def exact_grad(self, x):
        x = check_vector(x, self.dim)
        return self._damp * self.omega * np.cos(self.omega * x) - self.lam * x

    def exact_hessian(self, x):
        x = check_vector(x, self.dim)
        return np.diag(-self._damp * self.omega**2 * np.sin(self.omega * x)) - self.lam * np.eye(self.dim)

    def exact_optimum(self, region):
        """Coordinatewise maximiser over a box (the objective is separable)."""
        from scipy.optimize import minimize_scalar

        from .lmo import Box

        if not isinstance(region, Box):
            return None
        x = np.empty(self.dim)
        for i, (lo, hi) in enumerate(zip(region.lower, region.upper)):
            grid = np.linspace(lo, hi, 4001)
            vals = self._damp * np.sin(self.omega * grid) - 0.5 * self.lam * grid**2
            k = int(np.argmax(vals))
            a, b = grid[max(k - 1, 0)], grid[min(k + 1, grid.size - 1)]
            res = minimize_scalar(lambda u: -(self._damp * np.sin(self.omega * u) - 0.5 * self.lam * u * u),
                                  bounds=(a, b), method="bounded", options={"xatol": 1e-12})
            x[i] = res.x if -res.fun >= vals[k] else grid[k]
        return x, self.exact_value(x)


def sinusoid_profile(family, region, L2=1e-6):
    d = family.dim
    lo, hi = region.bounding_box()
    reach = np.maximum(np.abs(lo), np.abs(hi))
    B = d + 0.5 * family.lam * float(reach @ reach)
    G = max(family.lam * float(np.linalg.norm(reach)), (d * d + 2.0 * d) ** 0.25 / family.sigma)
    L = max(family.lam, 1.0 / family.sigma**2)
    return SmoothnessProfile(B=B, G=G, L=L, L2=L2, D=region.diameter())


# ---------------------------------------------------------------------------
# Oblivious / deterministic objectives
# ---------------------------------------------------------------------------

class ObliviousQuadratic(NonObliviousObjective):
    """``F~(x; z) = -x'Ax/2 + z'x`` with ``z ~ N(b, noise^2 I)`` independent of ``x``.

    With ``noise=0`` the distribution is a point mass and every estimator is exact.
    """

    has_second_order = True
    has_exact = True

    def __init__(self, A, b, noise=0.0):
        A = np.atleast_2d(np.asarray(A, dtype=float))
        super().__init__(A.shape[0])
        if A.shape != (self.dim, self.dim) or not np.allclose(A, A.T):
            raise InvalidParameterError("A must be a symmetric square matrix")
        self.A = A
        self.b = check_vector(b, self.dim, "b")
        self.noise = check_positive(noise, "noise", strict=False)

    def sample(self, X, gen):
        Z = np.broadcast_to(self.b, X.shape).copy()
        if self.noise > 0:
            Z += self.noise * gen.standard_normal(X.shape)
        return Z

    def value(self, X, Z):
        return -0.5 * np.einsum("ki,ij,kj->k", X, self.A, X) + np.einsum("ki,ki->k", Z, X)

    def grad(self, X, Z):
        return -X @ self.A + Z

    def logp_grad(self, X, Z):
        return np.zeros_like(X)

    def hvp(self, X, Z, D):
        return -D @ self.A

    def logp_hvp(self, X, Z, D):
        return np.zeros_like(D)

    def exact_value(self, x):
        x = check_vector(x, self.dim)
        return float(-0.5 * x @ self.A @ x + self.b @ x)

    def exact_grad(self, x):
        x = check_vector(x, self.dim)
        return -self.A @ x + self.b

    def exact_hessian(self, x):
        return -self.A.copy()

    def exact_optimum(self, region):
        return _box_clip_optimum(self, region, self.A, self.b)


def make_concave_quadratic(center, scale=1.0, noise=0.0):
    """``F(x) = -scale * ||x - center||^2`` as an oblivious quadratic.

    The constant ``-scale ||center||^2`` is folded into the exact value so the
    maximum over any region containing ``center`` is exactly zero.
    """
    center = check_vector(center, name="center")
    scale = check_positive(scale, "scale")
    return _ShiftedQuadratic(2 * scale * np.eye(center.size), 2 * scale * center, noise,
                             offset=-scale * float(center @ center))


class _ShiftedQuadratic(ObliviousQuadratic):
    def __init__(self, A, b, noise, offset):
        super().__init__(A, b, noise)
        self.offset = offset

    def value(self, X, Z):
        return super().value(X, Z) + self.offset

    def exact_value(self, x):
        return super().exact_value(x) + self.offset


def quadratic_profile(obj, region, tail=3.0):
    """Constants for an :class:`ObliviousQuadratic` over ``region``'s bounding box.

    Value and gradient bounds are taken at the box corners (the extreme points
    of the convex functions ``|F~|`` and ``||grad F~||``) and widened by
    ``tail`` noise standard deviations per coordinate.
    """
    lo, hi = region.bounding_box()
    d = obj.dim
    if d > 16:
        raise InvalidParameterError("corner enumeration limited to dim <= 16")
    corners = np.array([[hi[i] if (k >> i) & 1 else lo[i] for i in range(d)]
                        for k in range(1 << d)])
    slack = tail * obj.noise
    vals = obj.value(corners, np.broadcast_to(obj.b, corners.shape))
    best = _box_clip_optimum(obj, _BoxView(lo, hi), obj.A, obj.b)
    if best is not None:
        vals = np.append(vals, best[1])
    B = float(np.max(np.abs(vals)) + slack * np.max(np.abs(corners).sum(axis=1)))
    G = float(np.max(np.linalg.norm(-corners @ obj.A + obj.b, axis=1)) + slack * math.sqrt(d))
    return SmoothnessProfile(B=max(B, 1e-12), G=max(G, 1e-12), L=float(np.linalg.norm(obj.A, 2)),
                             L2=0.0, D=region.diameter())


class _BoxView:
    def __init__(self, lower, upper):
        self.lower, self.upper = lower, upper


def _box_clip_optimum(obj, region, A, b):
    """Maximiser of a separable concave quadratic over a box, else ``None``."""
    from .lmo import Box

    if not isinstance(region, (Box, _BoxView)):
        return None
    if not np.allclose(A, np.diag(np.diag(A))) or np.any(np.diag(A) <= 0):
        return None
    x_star = np.clip(b / np.diag(A), region.lower, region.upper)
    return x_star, obj.exact_value(x_star)


# ---------------------------------------------------------------------------
# Operations
# ---------------------------------------------------------------------------

def mc_value(obj, x, n, rng=None):
    """Monte-Carlo estimate of ``F(x)``; returns ``(mean, standard_error)``."""
    x = check_vector(x, obj.dim)
    n = check_count(n, "n")
    stream = as_stream(rng)

    def chunk(size, gen):
        vals = obj.value(np.broadcast_to(x, (size, obj.dim)),
                         obj.sample(np.broadcast_to(x, (size, obj.dim)).copy(), gen))
        return vals.sum(), (vals * vals).sum()

    total = sq = 0.0
    for s, s2 in map_chunks(chunk, n, stream):
        total += s
        sq += s2
    mean = total / n
    if n == 1:
        return float(mean), float("nan")
    var = max(sq / n - mean * mean, 0.0) * n / (n - 1)
    return float(mean), float(math.sqrt(var / n))


@dataclass
class DRReport:
    passed: bool
    max_cross: float
    worst_point: np.ndarray


def check_dr_submodular(obj, grid, tol=0.0, fd_step=1e-5):
    """Check that every cross second partial of ``F`` is ``<= tol`` on ``grid``.

    Uses the exact Hessian when available, otherwise central differences of
    the exact gradient.
    """
    grid = [check_vector(p, obj.dim, "grid point") for p in grid]
    worst, worst_pt = -np.inf, None
    off = ~np.eye(obj.dim, dtype=bool)
    for p in grid:
        H = _hessian_for_check(obj, p, fd_step)
        m = H[off].max() if obj.dim > 1 else -np.inf
        if m > worst:
            worst, worst_pt = m, p
    if worst_pt is None:
        worst_pt = grid[0] if grid else np.zeros(obj.dim)
        worst = 0.0
    return DRReport(bool(worst <= tol), float(worst), worst_pt)


def _hessian_for_check(obj, x, h):
    try:
        return np.asarray(obj.exact_hessian(x), dtype=float)
    except UnsupportedOperationError:
        pass
    cols = []
    for j in range(obj.dim):
        e = np.zeros(obj.dim)
        e[j] = h
        cols.append((obj.exact_grad(x + e) - obj.exact_grad(x - e)) / (2 * h))
    H = np.column_stack(cols)
    return 0.5 * (H + H.T)


def estimate_profile(obj, region, n_points=20, n_samples=2000, rng=None):
    """Empirical smoothness constants, for diagnostics only.

    Points are random convex combinations of LMO vertices of ``region``.
    """
    gen = as_stream(rng).generator()
    pts = []
    for _ in range(n_points):
        verts = [region.lmo(gen.standard_normal(obj.dim)) for _ in range(3)]
        w = gen.dirichlet(np.ones(3))
        pts.append(sum(wi * v for wi, v in zip(w, verts)))
    B = G_f = G_p = L_f = L_p = 0.0
    for p in pts:
        X = np.broadcast_to(p, (n_samples, obj.dim)).copy()
        s = obj.draw(X, gen)
        B = max(B, float(np.max(np.abs(s.value))))
        G_f = max(G_f, float(np.max(np.linalg.norm(s.grad, axis=1))))
        G_p = max(G_p, float(np.mean(np.linalg.norm(s.logp_grad, axis=1) ** 4)) ** 0.25)
        if obj.has_second_order:
            Hf = obj.hessian(X[:200], take_payload(s.payload, np.arange(200)))
            Hp = obj.logp_hessian(X[:200], take_payload(s.payload, np.arange(200)))
            L_f = max(L_f, float(np.max(np.linalg.norm(Hf, 2, axis=(1, 2)))))
            L_p = max(L_p, float(np.mean(np.linalg.norm(Hp, 2, axis=(1, 2)) ** 2)) ** 0.5)
    return SmoothnessProfile(B=max(B, 1e-12), G=max(G_f, G_p, 1e-12), L=max(L_f, L_p),
                             L2=1.0, D=region.diameter())
