"""Invariant suites behind ``nobliv-cg check``.

Each check returns ``(passed, detail)``.  Statistical checks compare Monte
Carlo means with closed forms at a 5 standard-error tolerance on fixed seeds,
so a suite gives the same verdict on every invocation.
"""
import math
import time

import numpy as np

from .estimators import (anchor_gradient_samples, delta_exact, hessian_estimate, hvp_fd,
                         path_delta_samples, sample_path_batch, xi_delta)
from .lmo import Box, CardinalityPolytope, ScaledSimplex, shrink
from .problems import SinusoidFamily, check_dr_submodular, make_gaussian_family
from .solvers import schedule_multilinear, scg_pp, smcg_pp
from .submodular import (Cardinality, as_non_oblivious, brute_force_opt, coverage_fixture,
                         multilinear_grad_exact, multilinear_value_exact, random_coverage,
                         random_directed_cut)

SE_TOL = 5.0


def _within_se(samples, target):
    samples = np.asarray(samples, dtype=float)
    n = samples.shape[0]
    mean = samples.mean(axis=0)
    se = samples.std(axis=0, ddof=1) / math.sqrt(n)
    z = np.abs(mean - target) / np.maximum(se, 1e-12)
    exact_match = np.abs(mean - target) <= 1e-9
    ok = bool(np.all((z <= SE_TOL) | exact_match))
    return ok, float(np.max(np.where(exact_match, 0.0, z)))


# -- estimators ---------------------------------------------------------------

def check_anchor_unbiased():
    obj = make_gaussian_family(5, 1.0)
    rng = np.random.default_rng(11)
    worst = 0.0
    for k in range(3):
        x = rng.uniform(0, 1, 5)
        ok, z = _within_se(anchor_gradient_samples(obj, x, 50_000, 100 + k), obj.exact_grad(x))
        worst = max(worst, z)
        if not ok:
            return False, f"max z-score {z:.2f} at point {k}"
    return True, f"max z-score {worst:.2f}"


def check_hessian_unbiased():
    obj = make_gaussian_family(5, 1.0)
    x = np.full(5, 0.3)
    gen = np.random.default_rng(12)
    X = np.broadcast_to(x, (50_000, 5))
    H = hessian_estimate(obj, X, obj.draw(X, gen)).reshape(50_000, -1)
    ok, z = _within_se(H, obj.exact_hessian(x).ravel())
    return ok, f"max z-score {z:.2f}"


def check_path_unbiased():
    obj = SinusoidFamily(3, sigma=0.7, omega=1.3, lam=0.2)
    x0, x1 = np.array([0.1, 0.5, 0.9]), np.array([0.6, 0.2, 0.4])
    target = obj.exact_grad(x1) - obj.exact_grad(x0)
    ok, z = _within_se(path_delta_samples(obj, x0, x1, 50_000, 13, hvp="exact"), target)
    return ok, f"max z-score {z:.2f}"


def check_fd_matches_exact():
    obj = SinusoidFamily(3, sigma=0.7, omega=1.3, lam=0.2)
    x0, x1 = np.array([0.1, 0.5, 0.9]), np.array([0.6, 0.2, 0.4])
    batch = sample_path_batch(obj, x0, x1, 200, 14)
    err = float(np.max(np.abs(xi_delta(obj, batch, x1 - x0, 1e-4) - delta_exact(obj, batch, x1 - x0))))
    return err <= 1e-5, f"max |xi - delta| = {err:.2e}"


def check_hvp_quadratic():
    A = np.array([[2.0, 0.5, 0.0], [0.5, 1.0, -0.3], [0.0, -0.3, 3.0]])
    y, v = np.array([0.2, -0.4, 1.0]), np.array([1.0, 2.0, -0.5])
    err = float(np.max(np.abs(hvp_fd(lambda u: A @ u, y, v, 1e-3) - A @ v)))
    return err <= 1e-10, f"error {err:.2e}"


# -- submodular ---------------------------------------------------------------

def check_fixture_optima():
    f = coverage_fixture()
    cases = [(1, ({0}, 1.0)), (0, (set(), 0.0))]
    for k, (S, v) in cases:
        got = brute_force_opt(f, Cardinality(k, 2))
        if set(got[0]) != S or abs(got[1] - v) > 1e-12:
            return False, f"k={k}: got {got}"
    return True, "coverage fixture optima"


def check_multilinear_value():
    f = coverage_fixture()
    v = multilinear_value_exact(f, np.array([0.5, 0.5]))
    return abs(v - 0.75) <= 1e-12, f"F(0.5, 0.5) = {v}"


def check_multilinear_estimators():
    f = random_coverage(6, rng=3)
    obj = as_non_oblivious(f, exact=False)
    x0 = np.linspace(0.1, 0.6, 6)
    x1 = x0[::-1].copy()
    ok1, z1 = _within_se(anchor_gradient_samples(obj, x0, 20_000, 21), multilinear_grad_exact(f, x0))
    target = multilinear_grad_exact(f, x1) - multilinear_grad_exact(f, x0)
    ok2, z2 = _within_se(path_delta_samples(obj, x0, x1, 20_000, 22), target)
    return ok1 and ok2, f"anchor z {z1:.2f}, delta z {z2:.2f}"


def check_dr_coverage():
    obj = as_non_oblivious(random_coverage(4, rng=4))
    grid = np.random.default_rng(5).uniform(0, 1, (6, 4))
    report = check_dr_submodular(obj, grid, tol=1e-9)
    return report.passed, f"max cross entry {report.max_cross:.3g}"


def check_shrink_lmo():
    region = CardinalityPolytope(1, 2)
    v = shrink(region, np.array([1.0, 0.0]), 1.0).lmo(np.array([1.0, 1.0]))
    ok = np.array_equal(v, [0.0, 1.0])
    v2 = ScaledSimplex(3).lmo(np.array([-1.0, -2.0, -0.5]))
    return ok and not v2.any(), f"shrunk LMO {v.tolist()}"


# -- solvers ------------------------------------------------------------------

def check_scg_ratio():
    f = random_coverage(8, rng=1)
    region = CardinalityPolytope(3, 8)
    opt = brute_force_opt(f, Cardinality(3, 8))[1]
    obj = as_non_oblivious(f)
    sched = schedule_multilinear("scg_pp", f, 3, T=40)
    vals = [multilinear_value_exact(f, scg_pp(obj, region, sched, s, track="none").x_output)
            for s in range(3)]
    ratio = float(np.mean(vals)) / opt
    return ratio >= 1 - 1 / math.e - 0.05, f"ratio {ratio:.3f}"


def check_smcg_feasible():
    f = random_directed_cut(6, rng=6)
    region = CardinalityPolytope(2, 6)
    sched = schedule_multilinear("smcg_pp", f, 2, T=20)
    trace = smcg_pp(as_non_oblivious(f), region, 0.8, sched, 1, track="none", keep_iterates=True)
    ok = all(np.all(x <= 0.8 + 1e-9) for x in trace.iterates) and region.contains(trace.x_output)
    return ok, "iterates stay below ubar"


def check_deterministic_trace():
    f = random_coverage(5, rng=7)
    region = CardinalityPolytope(2, 5)
    sched = schedule_multilinear("scg_pp", f, 2, T=10)
    obj = as_non_oblivious(f)
    a = scg_pp(obj, region, sched, 42).to_csv()
    b = scg_pp(obj, region, sched, 42).to_csv()
    return a == b, "identical CSV text"


def check_oracle_accounting():
    f = random_coverage(5, rng=8)
    region = CardinalityPolytope(2, 5)
    sched = schedule_multilinear("scg_pp", f, 2, T=12)
    trace = scg_pp(as_non_oblivious(f), region, sched, 3, track="none")
    return trace.oracle_calls == sched.planned_oracle_calls(), \
        f"{trace.oracle_calls} calls vs {sched.planned_oracle_calls()} planned"


def check_box_lmo_vertex():
    box = Box(0.0, 2.0, 3)
    v = box.lmo(np.array([1.0, -1.0, 0.0]))
    return np.array_equal(v, [2.0, 0.0, 0.0]), f"vertex {v.tolist()}"


SUITES = {
    "estimators": [check_anchor_unbiased, check_hessian_unbiased, check_path_unbiased,
                   check_fd_matches_exact, check_hvp_quadratic],
    "submodular": [check_fixture_optima, check_multilinear_value, check_multilinear_estimators,
                   check_dr_coverage, check_shrink_lmo],
    "solvers": [check_box_lmo_vertex, check_scg_ratio, check_smcg_feasible,
                check_deterministic_trace, check_oracle_accounting],
}


def run_suite(name, out=print):
    """Run a suite (or ``"all"``); returns True when every check passes."""
    names = list(SUITES) if name == "all" else [name]
    if any(n not in SUITES for n in names):
        raise KeyError(name)
    passed = True
    for suite in names:
        for fn in SUITES[suite]:
            start = time.perf_counter()
            try:
                ok, detail = fn()
            except Exception as exc:  # a crashing check is a failing check
                ok, detail = False, f"{type(exc).__name__}: {exc}"
            passed &= bool(ok)
            label = fn.__name__.removeprefix("check_")
            out(f"{'PASS' if ok else 'FAIL'} {suite}.{label} ({detail}; "
                f"{time.perf_counter() - start:.1f}s)")
    return passed
