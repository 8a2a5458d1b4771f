"""Variance-reduced conditional-gradient solvers and baselines.

Every solver maximises ``F`` over a feasible region.  The variance-reduced
methods keep a running gradient estimate ``g`` that is rebuilt from a large
"anchor" minibatch on some iterations and otherwise advanced by unbiased
estimates of the gradient change along the last step.

Functional entry points (:func:`sfw_nonconvex`, :func:`sfw_convex`,
:func:`scg_pp`, :func:`smcg_pp`) return a :class:`RunTrace`.  The estimator
classes wrap them in a scikit-learn style ``fit``/``get_params`` interface.
"""
from dataclasses import dataclass, field
import csv
import io
import math
import time

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from ._random import ANCHOR, EVAL, OUTPUT, PATH, as_stream
from .estimators import (HvpMethod, anchor_gradient, default_delta, delta_is_small,
                         path_delta, update_gradient_estimate)
from .exceptions import (InfeasibleShrinkError, InvalidParameterError, InvariantViolation,
                         UnsupportedOperationError)
from .lmo import shrink
from .problems import lbar, mc_value
from .validation import check_count, check_positive, check_vector

KINDS = ("sfw_nonconvex", "sfw_convex", "scg_pp", "smcg_pp")
DEFAULT_BATCH_CAP = 100_000
DEFAULT_EVAL_SAMPLES = 10_000
TRACE_COLUMNS = ("t", "eta", "batch_anchor", "batch_path", "oracle_calls", "f_value",
                 "f_is_exact", "fw_gap", "gap_is_exact", "wallclock_ms")


# ---------------------------------------------------------------------------
# Schedules
# ---------------------------------------------------------------------------

@dataclass
class SolverSchedule:
    """Step sizes, anchor rule and minibatch sizes of one run.

    Raw batch sizes are real numbers; :meth:`anchor_batch` and
    :meth:`path_batch` round them up and clip them at ``batch_cap``, recording
    a warning when the cap binds.
    """

    kind: str
    epsilon: float
    T: int
    q: int = None
    eta_const: float = None
    anchor_const: float = None
    path_const: float = None
    G: float = None
    Lbar: float = None
    D: float = None
    hvp: HvpMethod = field(default_factory=HvpMethod)
    delta: float = None
    batch_cap: int = DEFAULT_BATCH_CAP
    warnings: list = field(default_factory=list)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidParameterError(f"unknown solver kind {self.kind!r}")
        self.T = check_count(self.T, "T")
        self.batch_cap = check_count(self.batch_cap, "batch_cap")
        if self.eta_const is not None and not 0.0 <= self.eta_const <= 1.0:
            raise InvalidParameterError("eta must lie in [0, 1]")

    def eta(self, t):
        if self.eta_const is not None:
            return float(self.eta_const)
        if self.kind == "sfw_convex":
            return 2.0 / (t + 2)
        return 1.0 / self.T

    def is_anchor(self, t):
        if self.kind == "sfw_nonconvex":
            return t % self.q == 0
        if self.kind == "sfw_convex":
            return t == 0 or (t & (t - 1)) == 0
        return t == 0

    def raw_anchor(self, t):
        if self.anchor_const is not None or self.kind != "sfw_convex":
            return self.anchor_const
        return self.G**2 * (t + 1) ** 2 / (self.Lbar**2 * self.D**2)

    def raw_path(self, t):
        if self.path_const is not None or self.kind != "sfw_convex":
            return self.path_const
        return 16.0 * (t + 2)

    def _size(self, raw, label):
        n = max(1, math.ceil(raw - 1e-9))
        if n > self.batch_cap:
            msg = f"{label} batch capped at {self.batch_cap}"
            if msg not in self.warnings:
                self.warnings.append(msg)
            n = self.batch_cap
        return n

    def anchor_batch(self, t):
        return self._size(self.raw_anchor(t), "anchor")

    def path_batch(self, t):
        return self._size(self.raw_path(t), "path")

    def planned_oracle_calls(self):
        """Sum of the batch sizes the schedule prescribes over ``t = 0 .. T-1``."""
        return sum(self.anchor_batch(t) if self.is_anchor(t) else self.path_batch(t)
                   for t in range(self.T))

    def to_dict(self):
        return {"kind": self.kind, "epsilon": self.epsilon, "T": self.T, "q": self.q,
                "eta": self.eta_const, "anchor_batch": self.anchor_const,
                "path_batch": self.path_const, "hvp": self.hvp.kind, "delta": self.delta,
                "batch_cap": self.batch_cap}


def schedule_from_epsilon(kind, profile, epsilon, batch_cap=DEFAULT_BATCH_CAP, T=None,
                          initial_gap=None, hvp=None, delta=None, eta=None, q=None,
                          anchor_batch=None, path_batch=None):
    """Rate-optimal schedule for ``kind`` at accuracy ``epsilon``.

    ``sfw_nonconvex``: ``eta = eps/(Lbar D)``, ``q = ceil(G/(16 eps))``,
    ``M0 = G^2/(8 eps^2)``, ``Mh = 2G/eps``, ``T = Lbar gap0 / eps^2``.
    ``sfw_convex``: ``eta_t = 2/(t+2)``, ``Mh_t = 16(t+2)``,
    ``M0_t = G^2 (t+1)^2/(Lbar^2 D^2)``, ``T = (28 Lbar D^2 + gap0)/eps``.
    ``scg_pp``/``smcg_pp``: ``M0 = G^2/(2 Lbar^2 D^2 eps^2)``, ``M = 1/(2 eps)``,
    ``T = 1/eps``.  Keyword overrides replace individual entries.
    """
    if kind not in KINDS:
        raise InvalidParameterError(f"unknown solver kind {kind!r}")
    epsilon = float(epsilon)
    if not 0.0 < epsilon < 1.0:
        raise InvalidParameterError(f"epsilon must lie in (0, 1), got {epsilon}")
    G, D, Lb = profile.G, profile.D, lbar(profile)
    warnings = []
    sched = dict(G=G, Lbar=Lb, D=D)
    if kind == "sfw_nonconvex":
        sched.update(eta_const=epsilon / (Lb * D), q=math.ceil(G / (16 * epsilon) - 1e-12),
                     anchor_const=G**2 / (8 * epsilon**2), path_const=2 * G / epsilon)
        if T is None:
            if initial_gap is None:
                raise InvalidParameterError("sfw_nonconvex needs T or initial_gap")
            T = max(1, math.ceil(Lb * initial_gap / epsilon**2 - 1e-9))
    elif kind == "sfw_convex":
        if T is None:
            if initial_gap is None:
                warnings.append("initial_gap unknown; T computed with gap0 = 0")
            T = max(1, math.ceil((28 * Lb * D**2 + (initial_gap or 0.0)) / epsilon - 1e-9))
    else:
        sched.update(anchor_const=G**2 / (2 * Lb**2 * D**2 * epsilon**2),
                     path_const=1.0 / (2 * epsilon))
        if T is None:
            T = math.ceil(1.0 / epsilon - 1e-9)
    for key, value in (("eta_const", eta), ("q", q), ("anchor_const", anchor_batch),
                       ("path_const", path_batch)):
        if value is not None:
            sched[key] = value
    if sched.get("q") is not None:
        sched["q"] = check_count(sched["q"], "q")
    return SolverSchedule(kind=kind, epsilon=epsilon, T=T, hvp=hvp or HvpMethod(),
                          delta=delta, batch_cap=batch_cap, warnings=warnings, **sched)


def schedule_multilinear(kind, f, rank, epsilon=None, constant=1.0, batch_cap=DEFAULT_BATCH_CAP,
                         T=None, anchor_batch=None, path_batch=None):
    """Continuous-greedy schedule for a multilinear extension.

    ``M = c sqrt(r^3 d) D_f / eps``, ``M0 = c sqrt(d) D_f / (sqrt(r) eps^2)`` and
    ``T = sqrt(r^3 d) D_f / eps``; ``c`` is the unstated leading constant.
    ``epsilon`` is an absolute accuracy and may exceed one.  When ``T`` is
    given and ``epsilon`` is None, ``epsilon`` is solved from the ``T`` formula.
    """
    if kind not in ("scg_pp", "smcg_pp"):
        raise InvalidParameterError("multilinear schedules exist for scg_pp and smcg_pp only")
    check_positive(constant, "constant")
    d, Df, r = f.ground_size, f.D_f, check_count(rank, "rank")
    if epsilon is None:
        if T is None:
            raise InvalidParameterError("need epsilon or T")
        epsilon = math.sqrt(r**3 * d) * Df / check_count(T, "T")
    epsilon = check_positive(epsilon, "epsilon")
    root = math.sqrt(r**3 * d) * Df / epsilon
    if T is None:
        T = max(1, math.ceil(root - 1e-9))
    return SolverSchedule(
        kind=kind, epsilon=epsilon, T=T,
        anchor_const=anchor_batch if anchor_batch is not None
        else constant * math.sqrt(d) * Df / (math.sqrt(r) * epsilon**2),
        path_const=path_batch if path_batch is not None else constant * root,
        batch_cap=batch_cap)


# ---------------------------------------------------------------------------
# Traces
# ---------------------------------------------------------------------------

@dataclass
class RunTrace:
    """Per-iteration record of one run plus its output point."""

    kind: str
    rows: list = field(default_factory=list)
    x_final: np.ndarray = None
    x_output: np.ndarray = None
    output_index: int = None
    iterates: list = None
    gradients: list = None
    warnings: list = field(default_factory=list)

    def column(self, name):
        i = TRACE_COLUMNS.index(name)
        return np.array([row[i] for row in self.rows], dtype=float)

    @property
    def oracle_calls(self):
        return int(self.rows[-1][4]) if self.rows else 0

    def to_csv(self, path=None):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(TRACE_COLUMNS)
        for row in self.rows:
            w.writerow([_fmt(v) for v in row])
        text = buf.getvalue()
        if path is not None:
            with open(path, "w", newline="") as fh:
                fh.write(text)
        return text

    def summary(self):
        f = self.column("f_value")
        return {"kind": self.kind, "T": len(self.rows) - 1, "final_value": _num(f[-1]),
                "final_value_is_exact": bool(self.rows[-1][6]) if self.rows else False,
                "output_index": self.output_index,
                "x_output": None if self.x_output is None else [float(v) for v in self.x_output],
                "oracle_calls": self.oracle_calls, "warnings": list(self.warnings)}


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    v = float(v)
    if math.isnan(v):
        return "nan"
    return repr(v)


def _num(v):
    v = float(v)
    return None if math.isnan(v) else v


def read_trace_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


# ---------------------------------------------------------------------------
# Evaluation helpers
# ---------------------------------------------------------------------------

def fw_gap(grad, region, x):
    """``max_{u in region} <grad, u - x>`` via one LMO call.

    ``grad`` is a vector or a callable returning the gradient at ``x``.
    """
    x = check_vector(x, region.dim)
    g = grad(x) if callable(grad) else check_vector(grad, region.dim, "grad")
    return float(g @ (region.lmo(g) - x))


class _Evaluator:
    """Exact values and gaps when the objective has them, else Monte Carlo."""

    def __init__(self, obj, region, stream, n_samples, track):
        self.obj, self.region, self.stream = obj, region, stream
        self.n, self.track = n_samples, track
        self.exact = getattr(obj, "has_exact", False)

    def __call__(self, t, x, final):
        if self.track == "none" or (self.track == "final" and not final):
            return math.nan, False, math.nan, False
        if self.exact:
            try:
                return (self.obj.exact_value(x), True,
                        fw_gap(self.obj.exact_grad(x), self.region, x), True)
            except UnsupportedOperationError:
                self.exact = False
        s = self.stream.child(t, EVAL)
        value = mc_value(self.obj, x, self.n, s.child(0))[0]
        grad = anchor_gradient(self.obj, x, self.n, s.child(1)).g
        return value, False, fw_gap(grad, self.region, x), False


def resolve_hvp(obj, schedule, profile=None):
    """Concrete Hessian-vector method; checks a finite-difference step for smallness."""
    if getattr(obj, "path_delta_samples", None) is not None:
        return None
    method = schedule.hvp
    kind = method.kind
    if kind == "auto":
        kind = "exact" if obj.has_second_order else "fd"
    if kind == "exact":
        return HvpMethod("exact")
    delta = method.delta if method.delta is not None else schedule.delta
    if delta is None:
        if profile is None:
            raise InvalidParameterError("finite-difference HVP needs delta or a profile")
        delta = default_delta(profile, schedule.epsilon, schedule.T)
    if profile is not None:
        M = min(schedule.path_batch(t) for t in range(1, max(2, schedule.T)))
        if not delta_is_small(profile, delta, schedule.epsilon, schedule.T, M):
            raise InvalidParameterError(
                f"finite-difference step delta={delta:g} too large for epsilon={schedule.epsilon:g}")
    return HvpMethod("fd", delta)


# ---------------------------------------------------------------------------
# Core loops
# ---------------------------------------------------------------------------

def _run(obj, region, schedule, rng, *, greedy, ubar=None, x0=None, profile=None,
         eval_samples=DEFAULT_EVAL_SAMPLES, track="all", keep_iterates=False,
         keep_gradients=False, wallclock=False):
    stream = as_stream(rng)
    method = resolve_hvp(obj, schedule, profile)
    T = schedule.T
    if greedy:
        x = np.zeros(obj.dim) if x0 is None else check_vector(x0, obj.dim, "x0").copy()
    else:
        x = region.lmo(np.zeros(obj.dim)) if x0 is None else check_vector(x0, obj.dim, "x0").copy()
    evaluate = _Evaluator(obj, region, stream, eval_samples, track)
    trace = RunTrace(kind=schedule.kind, iterates=[] if keep_iterates else None,
                     gradients=[] if keep_gradients else None)
    start = time.perf_counter()
    calls = 0
    est = None
    x_prev = None
    for t in range(T + 1):
        if keep_iterates:
            trace.iterates.append(x.copy())
        if ubar is not None and np.any(x > ubar + 1e-9):
            raise InvariantViolation(f"iterate exceeds ubar at t={t}")
        if t == T:
            value, v_exact, gap, g_exact = evaluate(t, x, True)
            trace.rows.append([t, schedule.eta(t) if not greedy else 1.0 / T, 0, 0, calls,
                               value, v_exact, gap, g_exact, _clock(start, wallclock)])
            break
        m0 = mh = 0
        if schedule.is_anchor(t):
            m0 = schedule.anchor_batch(t)
            est = anchor_gradient(obj, x, m0, stream.child(t, ANCHOR), anchor_iter=t)
        else:
            mh = schedule.path_batch(t)
            delta = path_delta(obj, x_prev, x, mh, stream.child(t, PATH), method)
            est = update_gradient_estimate(est, delta, mh)
        calls += m0 + mh
        if keep_gradients:
            trace.gradients.append(est.g.copy())
        eta = schedule.eta(t)
        value, v_exact, gap, g_exact = evaluate(t, x, False)
        trace.rows.append([t, eta, m0, mh, calls, value, v_exact, gap, g_exact,
                           _clock(start, wallclock)])
        x_prev = x
        if greedy:
            lmo_region = region if ubar is None else shrink(region, x, ubar)
            x = x + lmo_region.lmo(est.g) / T
        else:
            x = x + eta * (region.lmo(est.g) - x)
    trace.x_final = x
    trace.warnings = list(schedule.warnings)
    return trace


def _clock(start, enabled):
    return round((time.perf_counter() - start) * 1000.0, 3) if enabled else None


def _check_kind(schedule, kinds):
    if schedule.kind not in kinds:
        raise InvalidParameterError(f"schedule kind {schedule.kind!r} not valid here")


def sfw_nonconvex(obj, region, schedule, rng=None, **options):
    """SFW++ with epoch anchors; the output is an iterate drawn uniformly from ``1..T``."""
    _check_kind(schedule, ("sfw_nonconvex",))
    keep = options.pop("keep_iterates", False)
    trace = _run(obj, region, schedule, rng, greedy=False, keep_iterates=True, **options)
    gen = as_stream(rng).child(schedule.T, OUTPUT).generator()
    trace.output_index = int(gen.integers(1, schedule.T + 1))
    trace.x_output = trace.iterates[trace.output_index].copy()
    if not keep:
        trace.iterates = None
    return trace


def sfw_convex(obj, region, schedule, rng=None, **options):
    """SFW++ with ``eta_t = 2/(t+2)`` and anchors at ``t = 0`` and powers of two."""
    _check_kind(schedule, ("sfw_convex",))
    trace = _run(obj, region, schedule, rng, greedy=False, **options)
    trace.x_output, trace.output_index = trace.x_final, schedule.T
    return trace


def scg_pp(obj, region, schedule, rng=None, tol=1e-9, **options):
    """Stochastic continuous greedy with a single anchor at ``t = 0``; starts at the origin."""
    _check_kind(schedule, ("scg_pp",))
    trace = _run(obj, region, schedule, rng, greedy=True, **options)
    if not region.contains(trace.x_final, tol):
        raise InvariantViolation("final continuous-greedy iterate left the feasible region")
    trace.x_output, trace.output_index = trace.x_final, schedule.T
    return trace


def smcg_pp(obj, region, ubar, schedule, rng=None, tol=1e-9, **options):
    """Measured continuous greedy: each LMO runs over ``{v in region : v <= ubar - x}``."""
    _check_kind(schedule, ("smcg_pp", "scg_pp"))
    if not region.down_closed:
        raise InvalidParameterError("measured continuous greedy needs a down-closed region")
    ubar = check_vector(np.broadcast_to(np.asarray(ubar, dtype=float), (region.dim,)),
                        region.dim, "ubar")
    try:
        trace = _run(obj, region, schedule, rng, greedy=True, ubar=ubar, **options)
    except InfeasibleShrinkError as exc:
        raise InvariantViolation(str(exc)) from None
    if not region.contains(trace.x_final, tol):
        raise InvariantViolation("final iterate left the feasible region")
    trace.x_output, trace.output_index = trace.x_final, schedule.T
    return trace


# ---------------------------------------------------------------------------
# Baselines
# ---------------------------------------------------------------------------

def _as_schedule_fn(value, default):
    if value is None:
        return default
    if callable(value):
        return value
    return lambda t: value


def baseline_scg_momentum(obj, region, T, rho_schedule=None, rng=None, batch=1,
                          eval_samples=DEFAULT_EVAL_SAMPLES, track="all", keep_iterates=False,
                          keep_gradients=False):
    """Continuous greedy with the averaged estimate ``g = (1 - rho) g + rho grad~``.

    The default ``rho_t = 4 / (t + 8)^(2/3)``.
    """
    T = check_count(T, "T")
    rho = _as_schedule_fn(rho_schedule, lambda t: min(1.0, 4.0 / (t + 8) ** (2.0 / 3.0)))
    batch_fn = _as_schedule_fn(batch, None)
    stream = as_stream(rng)
    evaluate = _Evaluator(obj, region, stream, eval_samples, track)
    x = np.zeros(obj.dim)
    g = np.zeros(obj.dim)
    trace = RunTrace(kind="scg_momentum", iterates=[] if keep_iterates else None,
                     gradients=[] if keep_gradients else None)
    calls = 0
    for t in range(T + 1):
        if keep_iterates:
            trace.iterates.append(x.copy())
        if t == T:
            trace.rows.append([t, 1.0 / T, 0, 0, calls, *evaluate(t, x, True), None])
            break
        m = check_count(int(batch_fn(t)), "batch")
        r = float(rho(t))
        if not 0.0 <= r <= 1.0:
            raise InvalidParameterError("rho must lie in [0, 1]")
        if r > 0.0:
            g = (1.0 - r) * g + r * anchor_gradient(obj, x, m, stream.child(t, ANCHOR)).g
            calls += m
        if keep_gradients:
            trace.gradients.append(g.copy())
        trace.rows.append([t, 1.0 / T, m if r > 0 else 0, 0, calls, *evaluate(t, x, False), None])
        x = x + region.lmo(g) / T
    trace.x_final = trace.x_output = x
    trace.output_index = T
    return trace


def baseline_sfw_vanilla(obj, region, T, batch_growth=None, rng=None, eta=None,
                         x0=None, eval_samples=DEFAULT_EVAL_SAMPLES, track="all",
                         keep_iterates=False, keep_gradients=False):
    """Frank-Wolfe with a fresh minibatch of size ``batch_growth(t)`` every step.

    ``eta`` defaults to ``2/(t+2)``; ``batch_growth`` defaults to ``t + 1``.
    """
    T = check_count(T, "T")
    batch_fn = _as_schedule_fn(batch_growth, lambda t: t + 1)
    eta_fn = _as_schedule_fn(eta, lambda t: 2.0 / (t + 2))
    stream = as_stream(rng)
    evaluate = _Evaluator(obj, region, stream, eval_samples, track)
    x = region.lmo(np.zeros(obj.dim)) if x0 is None else check_vector(x0, obj.dim, "x0").copy()
    trace = RunTrace(kind="sfw_vanilla", iterates=[] if keep_iterates else None,
                     gradients=[] if keep_gradients else None)
    calls = 0
    for t in range(T + 1):
        if keep_iterates:
            trace.iterates.append(x.copy())
        if t == T:
            trace.rows.append([t, eta_fn(t), 0, 0, calls, *evaluate(t, x, True), None])
            break
        m = max(1, math.ceil(batch_fn(t) - 1e-9))
        g = anchor_gradient(obj, x, m, stream.child(t, ANCHOR)).g
        calls += m
        if keep_gradients:
            trace.gradients.append(g.copy())
        trace.rows.append([t, eta_fn(t), m, 0, calls, *evaluate(t, x, False), None])
        x = x + eta_fn(t) * (region.lmo(g) - x)
    trace.x_final = trace.x_output = x
    trace.output_index = T
    return trace


# ---------------------------------------------------------------------------
# Estimator-style wrappers
# ---------------------------------------------------------------------------

class _SolverBase(BaseEstimator):
    """``fit(objective, region)`` runs the solver and stores ``x_`` and ``trace_``."""

    def _fitted(self):
        if not hasattr(self, "trace_"):
            raise NotFittedError(f"{type(self).__name__} is not fitted yet; call fit first")

    def _store(self, trace):
        self.trace_ = trace
        self.x_ = trace.x_output
        self.n_oracle_calls_ = trace.oracle_calls
        self.output_index_ = trace.output_index
        return self

    def score(self, objective, n_samples=DEFAULT_EVAL_SAMPLES):
        """``F(x_)``: exact when available, else a Monte-Carlo mean."""
        self._fitted()
        if getattr(objective, "has_exact", False):
            try:
                return objective.exact_value(self.x_)
            except UnsupportedOperationError:
                pass
        return mc_value(objective, self.x_, n_samples, as_stream(self.random_state).child(99))[0]


class _ScheduledSolver(_SolverBase):
    kind = None

    def _schedule(self, profile):
        if isinstance(self.schedule, SolverSchedule):
            return self.schedule
        if profile is None:
            raise InvalidParameterError("need a SmoothnessProfile or an explicit schedule")
        return schedule_from_epsilon(self.kind, profile, self.epsilon, batch_cap=self.batch_cap,
                                     T=self.T, initial_gap=self.initial_gap, hvp=self.hvp,
                                     delta=self.delta)

    def _options(self):
        return dict(eval_samples=self.eval_samples, track=self.track)


class SFWPlusPlus(_ScheduledSolver):
    """Variance-reduced stochastic Frank-Wolfe.

    Parameters
    ----------
    variant : {"nonconvex", "convex"}
    epsilon : float
        Target accuracy used to derive the schedule from ``profile``.
    T : int, optional
        Number of iterations; derived from ``epsilon`` when omitted.
    schedule : SolverSchedule, optional
        Use this schedule verbatim instead of deriving one.
    hvp : HvpMethod, optional
    random_state : int or None
    """

    def __init__(self, variant="convex", epsilon=0.1, T=None, schedule=None, hvp=None,
                 delta=None, batch_cap=DEFAULT_BATCH_CAP, initial_gap=None,
                 eval_samples=DEFAULT_EVAL_SAMPLES, track="all", random_state=None):
        self.variant = variant
        self.epsilon = epsilon
        self.T = T
        self.schedule = schedule
        self.hvp = hvp
        self.delta = delta
        self.batch_cap = batch_cap
        self.initial_gap = initial_gap
        self.eval_samples = eval_samples
        self.track = track
        self.random_state = random_state

    @property
    def kind(self):
        if self.variant not in ("nonconvex", "convex"):
            raise InvalidParameterError(f"unknown variant {self.variant!r}")
        return "sfw_" + self.variant

    def fit(self, objective, region, profile=None, x0=None):
        sched = self._schedule(profile)
        self.schedule_ = sched
        fn = sfw_nonconvex if sched.kind == "sfw_nonconvex" else sfw_convex
        return self._store(fn(objective, region, sched, self.random_state, x0=x0,
                              profile=profile, **self._options()))


class SCGPlusPlus(_ScheduledSolver):
    """Variance-reduced stochastic continuous greedy (monotone objectives)."""

    kind = "scg_pp"

    def __init__(self, epsilon=0.1, T=None, schedule=None, hvp=None, delta=None,
                 batch_cap=DEFAULT_BATCH_CAP, eval_samples=DEFAULT_EVAL_SAMPLES, track="final",
                 random_state=None):
        self.epsilon = epsilon
        self.T = T
        self.schedule = schedule
        self.hvp = hvp
        self.delta = delta
        self.batch_cap = batch_cap
        self.eval_samples = eval_samples
        self.track = track
        self.random_state = random_state

    initial_gap = None

    def fit(self, objective, region, profile=None):
        sched = self._schedule(profile)
        self.schedule_ = sched
        return self._store(scg_pp(objective, region, sched, self.random_state,
                                  profile=profile, **self._options()))


class SMCGPlusPlus(SCGPlusPlus):
    """Variance-reduced measured continuous greedy (non-monotone, down-closed regions)."""

    kind = "smcg_pp"

    def __init__(self, epsilon=0.1, T=None, ubar=1.0, schedule=None, hvp=None, delta=None,
                 batch_cap=DEFAULT_BATCH_CAP, eval_samples=DEFAULT_EVAL_SAMPLES, track="final",
                 random_state=None):
        super().__init__(epsilon=epsilon, T=T, schedule=schedule, hvp=hvp, delta=delta,
                         batch_cap=batch_cap, eval_samples=eval_samples, track=track,
                         random_state=random_state)
        self.ubar = ubar

    def fit(self, objective, region, profile=None):
        sched = self._schedule(profile)
        self.schedule_ = sched
        return self._store(smcg_pp(objective, region, self.ubar, sched, self.random_state,
                                   profile=profile, **self._options()))


class MomentumSCG(_SolverBase):
    """Continuous greedy with a momentum-averaged gradient (baseline)."""

    def __init__(self, T=40, rho=None, batch=1, eval_samples=DEFAULT_EVAL_SAMPLES,
                 track="final", random_state=None):
        self.T = T
        self.rho = rho
        self.batch = batch
        self.eval_samples = eval_samples
        self.track = track
        self.random_state = random_state

    def fit(self, objective, region):
        return self._store(baseline_scg_momentum(objective, region, self.T, self.rho,
                                                 self.random_state, self.batch,
                                                 self.eval_samples, self.track))


class VanillaSFW(_SolverBase):
    """Stochastic Frank-Wolfe with growing fresh minibatches (baseline)."""

    def __init__(self, T=50, batch_growth=None, eta=None, eval_samples=DEFAULT_EVAL_SAMPLES,
                 track="all", random_state=None):
        self.T = T
        self.batch_growth = batch_growth
        self.eta = eta
        self.eval_samples = eval_samples
        self.track = track
        self.random_state = random_state

    def fit(self, objective, region, x0=None):
        return self._store(baseline_sfw_vanilla(objective, region, self.T, self.batch_growth,
                                                self.random_state, self.eta, x0,
                                                self.eval_samples, self.track))
