"""Experiment configuration, orchestration and trace serialisation.

A config is a JSON document with sections ``problem``, ``region``, ``solver``,
``seeds`` and ``output``; see the README for the schema.  Each replication
writes ``trace_seed<k>.csv`` and ``summary_seed<k>.json`` into the output
directory, where ``k`` is the replication's seed.
"""
import copy
import csv
import json
import math
import os

import numpy as np

from .estimators import HvpMethod
from .exceptions import ConfigError, InvalidParameterError, UnsupportedOperationError
from .lmo import CardinalityPolytope, PartitionMatroidPolytope, region_from_dict
from .problems import (GaussianFamily, NegHalfSqNorm, ObliviousQuadratic, Quadratic,
                       SinusoidFamily, SmoothnessProfile, gaussian_profile,
                       make_concave_quadratic, quadratic_profile, sinusoid_profile)
from .solvers import (DEFAULT_BATCH_CAP, DEFAULT_EVAL_SAMPLES, baseline_scg_momentum,
                      baseline_sfw_vanilla, schedule_from_epsilon, schedule_multilinear, scg_pp,
                      sfw_convex, sfw_nonconvex, smcg_pp)
from .submodular import (MAX_ENUM, DirectedCut, FacilityLocation, Modular, WeightedCoverage,
                         as_non_oblivious, brute_force_opt, constraint_from_region,
                         random_coverage, random_directed_cut, random_facility_location,
                         random_modular)

SET_FAMILIES = ("coverage", "facility_location", "directed_cut", "modular")
CONTINUOUS_FAMILIES = ("gaussian", "sinusoid", "quadratic")
SOLVER_KINDS = ("sfw_nonconvex", "sfw_convex", "scg_pp", "smcg_pp", "scg_momentum", "sfw_vanilla")


# ---------------------------------------------------------------------------
# Loading
# ---------------------------------------------------------------------------

def load_config(path):
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from None
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a JSON object")
    cfg.setdefault("_base_dir", os.path.dirname(os.path.abspath(path)))
    validate_config(cfg)
    return cfg


def validate_config(cfg):
    for section in ("problem", "region", "solver"):
        if not isinstance(cfg.get(section), dict):
            raise ConfigError(f"config section {section!r} missing or not an object")
    family = cfg["problem"].get("family")
    if family not in SET_FAMILIES + CONTINUOUS_FAMILIES:
        raise ConfigError(f"unknown problem family {family!r}")
    kind = cfg["solver"].get("kind")
    if kind not in SOLVER_KINDS:
        raise ConfigError(f"unknown solver kind {kind!r}")
    seeds = cfg.setdefault("seeds", {})
    if not isinstance(seeds, dict):
        raise ConfigError("seeds must be an object")
    reps = seeds.setdefault("replications", 1)
    if not isinstance(reps, int) or reps < 1:
        raise ConfigError("seeds.replications must be an integer >= 1")
    seeds.setdefault("master", 0)
    return cfg


def _read_csv_rows(path, base_dir):
    full = path if os.path.isabs(path) else os.path.join(base_dir or ".", path)
    try:
        with open(full, newline="") as fh:
            return np.array([[float(v) for v in row] for row in csv.reader(fh) if row])
    except FileNotFoundError:
        raise ConfigError(f"weights file not found: {full}") from None
    except ValueError as exc:
        raise ConfigError(f"bad number in {full}: {exc}") from None


def build_set_function(problem, base_dir=None):
    family, params = problem["family"], dict(problem.get("params", {}))
    if params.get("random"):
        d = params.get("d")
        if d is None:
            raise ConfigError("random set-function instances need 'd'")
        seed = params.get("seed", 0)
        n_scen = params.get("n_scenarios", 8)
        if family == "coverage":
            return random_coverage(d, params.get("n_items"), n_scen, params.get("p_cover", 0.3), seed)
        if family == "facility_location":
            return random_facility_location(d, params.get("n_customers"), n_scen, seed)
        if family == "directed_cut":
            return random_directed_cut(d, n_scen, params.get("density", 0.5), seed)
        return random_modular(d, n_scen, seed)
    weights = params.get("weights")
    if weights is None and "weights_csv" in params:
        weights = _read_csv_rows(params["weights_csv"], base_dir)
    if weights is None:
        raise ConfigError(f"{family} needs 'weights', 'weights_csv' or 'random'")
    weights = np.asarray(weights, dtype=float)
    if family == "coverage":
        if "cover" not in params:
            raise ConfigError("coverage needs a 'cover' incidence matrix")
        return WeightedCoverage(params["cover"], weights)
    if family == "facility_location":
        if weights.ndim == 2 and "n_customers" in params:
            weights = weights.reshape(weights.shape[0], params["n_customers"], -1)
        return FacilityLocation(weights)
    if family == "directed_cut":
        if weights.ndim == 2:
            d = int(round(math.sqrt(weights.shape[1])))
            weights = weights.reshape(weights.shape[0], d, d)
        return DirectedCut(weights)
    return Modular(weights)


def build_objective(problem, base_dir=None):
    """Return ``(objective, set_function_or_None)``."""
    family, params = problem["family"], dict(problem.get("params", {}))
    if family in SET_FAMILIES:
        f = build_set_function(problem, base_dir)
        return as_non_oblivious(f, exact=problem.get("exact", True)), f
    if family == "gaussian":
        payoff = params.get("payoff", "neg_half_sq_norm")
        if payoff == "neg_half_sq_norm":
            payoff = NegHalfSqNorm()
        elif isinstance(payoff, dict):
            payoff = Quadratic(np.asarray(payoff["A"], dtype=float), np.asarray(payoff["b"], dtype=float))
        else:
            raise ConfigError(f"unknown gaussian payoff {payoff!r}")
        return GaussianFamily(params["dim"], params.get("sigma", 1.0), payoff), None
    if family == "sinusoid":
        return SinusoidFamily(params["dim"], params.get("sigma", 1.0), params.get("omega", 1.0),
                              params.get("lam", 0.0)), None
    return make_concave_quadratic(params["center"], params.get("scale", 1.0),
                                  params.get("noise", 0.0)), None


def build_profile(problem, obj, region):
    prof = problem.get("profile", "auto")
    if isinstance(prof, dict):
        return SmoothnessProfile(**prof)
    if prof != "auto":
        raise ConfigError("profile must be an object or 'auto'")
    if isinstance(obj, GaussianFamily):
        return gaussian_profile(obj, region)
    if isinstance(obj, SinusoidFamily):
        return sinusoid_profile(obj, region)
    if isinstance(obj, ObliviousQuadratic):
        return quadratic_profile(obj, region)
    return None


class Experiment:
    """A resolved config: objective, region, profile and solver settings."""

    def __init__(self, cfg):
        self.cfg = cfg
        base = cfg.get("_base_dir")
        try:
            self.obj, self.f = build_objective(cfg["problem"], base)
            region_spec = dict(cfg["region"])
            self.region = region_from_dict(region_spec, dim=self.obj.dim)
            if self.region.dim != self.obj.dim:
                raise ConfigError("region and problem dimensions differ")
            self.profile = build_profile(cfg["problem"], self.obj, self.region)
        except (KeyError, TypeError) as exc:
            raise ConfigError(f"bad problem description: {exc}") from None
        except InvalidParameterError as exc:
            raise ConfigError(str(exc)) from None
        self.solver = dict(cfg["solver"])

    # -- schedule ----------------------------------------------------------
    def initial_gap(self, x0):
        s = self.solver
        if s.get("initial_gap") is not None:
            return float(s["initial_gap"])
        best = self.obj.exact_optimum(self.region)
        if best is None:
            return None
        return best[1] - self.obj.exact_value(x0)

    def schedule(self):
        s, kind = self.solver, self.solver["kind"]
        cap = s.get("batch_cap", DEFAULT_BATCH_CAP)
        hvp = HvpMethod(s.get("hvp", "auto"), s.get("delta"))
        if kind in ("scg_pp", "smcg_pp") and (s.get("schedule") == "multilinear"
                                             or (self.f is not None and self.profile is None)):
            if self.f is None:
                raise ConfigError("multilinear schedule needs a set-function problem")
            rank = constraint_from_region(self.region).rank
            return schedule_multilinear(kind, self.f, rank, s.get("epsilon"),
                                        s.get("multilinear_constant", 1.0), cap, s.get("T"),
                                        s.get("anchor_batch"), s.get("path_batch"))
        if self.profile is None:
            raise ConfigError("this problem needs problem.profile")
        gap = None
        if kind.startswith("sfw") and s.get("T") is None:
            gap = self.initial_gap(self.region.lmo(np.zeros(self.obj.dim)))
        return schedule_from_epsilon(kind, self.profile, s.get("epsilon", 0.1), cap, s.get("T"),
                                     gap, hvp, s.get("delta"), s.get("eta"), s.get("q"),
                                     s.get("anchor_batch"), s.get("path_batch"))

    # -- one replication -----------------------------------------------------
    def run(self, seed):
        s, kind = self.solver, self.solver["kind"]
        options = dict(eval_samples=s.get("eval_samples", DEFAULT_EVAL_SAMPLES),
                       track=s.get("track", "all"))
        if kind == "scg_momentum":
            return baseline_scg_momentum(self.obj, self.region, s.get("T", 40), s.get("rho"), seed,
                                         s.get("batch", 1), **options), None
        if kind == "sfw_vanilla":
            return baseline_sfw_vanilla(self.obj, self.region, s.get("T", 50), s.get("batch"),
                                        seed, s.get("eta"), **options), None
        sched = self.schedule()
        options.update(profile=self.profile, wallclock=bool(s.get("wallclock", False)))
        if kind == "sfw_nonconvex":
            trace = sfw_nonconvex(self.obj, self.region, sched, seed, **options)
        elif kind == "sfw_convex":
            trace = sfw_convex(self.obj, self.region, sched, seed, **options)
        elif kind == "scg_pp":
            trace = scg_pp(self.obj, self.region, sched, seed, **options)
        else:
            ubar = s.get("ubar")
            if ubar is None:
                ubar = self.region.bounding_box()[1]
            trace = smcg_pp(self.obj, self.region, ubar, sched, seed, **options)
        return trace, sched

    def opt(self, out_dir=None):
        """Brute-force OPT for matroid-constrained set functions, cached as ``opt.json``."""
        if self.f is None or not isinstance(self.region, (CardinalityPolytope, PartitionMatroidPolytope)):
            return None
        if self.f.ground_size > MAX_ENUM:
            return None
        cache = os.path.join(out_dir, "opt.json") if out_dir else None
        if cache and os.path.exists(cache):
            with open(cache) as fh:
                return json.load(fh)
        S, value = brute_force_opt(self.f, constraint_from_region(self.region))
        report = {"set": sorted(S), "value": value}
        if cache:
            _write_json(cache, report)
        return report

    def final_value(self, trace):
        """Exact objective at the output point when available, else the trace value."""
        try:
            return float(self.obj.exact_value(trace.x_output)), True
        except UnsupportedOperationError:
            pass
        if self.f is not None and self.f.ground_size <= MAX_ENUM:
            from .submodular import multilinear_value_exact
            return multilinear_value_exact(self.f, trace.x_output), True
        return float(trace.column("f_value")[-1]), bool(trace.rows[-1][6])


def _write_json(path, obj):
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _out_dir(cfg, override=None):
    """``override`` is taken as given; a config ``output`` is relative to the config file."""
    if override:
        out = override
    else:
        out = cfg.get("output") or "."
        if not os.path.isabs(out) and cfg.get("_base_dir"):
            out = os.path.join(cfg["_base_dir"], out)
    os.makedirs(out, exist_ok=True)
    return out


def _seeds(cfg, seed_override=None):
    master = cfg["seeds"]["master"] if seed_override is None else seed_override
    return [int(master) + k for k in range(cfg["seeds"]["replications"])]


def run_experiment(cfg, seed_override=None, out_dir=None):
    """Run every replication of ``cfg``; returns the list of summaries."""
    out_dir = _out_dir(cfg, out_dir)
    exp = Experiment(cfg)
    opt = exp.opt(out_dir)
    summaries = []
    for seed in _seeds(cfg, seed_override):
        trace, sched = exp.run(seed)
        trace.to_csv(os.path.join(out_dir, f"trace_seed{seed}.csv"))
        summary = trace.summary()
        value, exact = exp.final_value(trace)
        summary.update(seed=seed, output_value=value, output_value_is_exact=exact,
                       schedule=sched.to_dict() if sched is not None else None,
                       min_fw_gap=_nanmin(trace.column("fw_gap")))
        if opt is not None:
            summary["opt"] = opt["value"]
            summary["opt_set"] = opt["set"]
            summary["ratio"] = value / opt["value"] if opt["value"] > 0 else None
        _write_json(os.path.join(out_dir, f"summary_seed{seed}.json"), summary)
        summaries.append(summary)
    return summaries


def _nanmin(a):
    a = np.asarray(a, dtype=float)
    return None if np.all(np.isnan(a)) else float(np.nanmin(a))


SWEEP_COLUMNS = ("value", "seed", "T", "final_value", "oracle_calls", "planned_oracle_calls",
                 "final_fw_gap", "min_fw_gap", "suboptimality", "ratio")


def sweep(cfg, param, values, seed_override=None, out_dir=None):
    """Repeat :func:`run_experiment` over ``solver.<param>`` values; writes ``sweep_<param>.csv``."""
    if not values:
        raise ConfigError("sweep needs at least one value")
    out_dir = _out_dir(cfg, out_dir)
    key = param.split(".", 1)[1] if param.startswith("solver.") else param
    rows = []
    for value in values:
        run_cfg = copy.deepcopy(cfg)
        run_cfg["solver"][key] = value
        exp = Experiment(run_cfg)
        opt = exp.opt(out_dir)
        best = exp.obj.exact_optimum(exp.region) if exp.obj.has_exact else None
        for seed in _seeds(run_cfg, seed_override):
            trace, sched = exp.run(seed)
            final, _ = exp.final_value(trace)
            gaps = trace.column("fw_gap")
            rows.append([value, seed, len(trace.rows) - 1, final, trace.oracle_calls,
                         sched.planned_oracle_calls() if sched is not None else "",
                         _blank(gaps[-1]), _blank(_nanmin(gaps)),
                         "" if best is None else best[1] - final,
                         "" if opt is None or opt["value"] <= 0 else final / opt["value"]])
    path = os.path.join(out_dir, f"sweep_{key}.csv")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SWEEP_COLUMNS)
        for row in rows:
            w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
    return path, rows


def _blank(v):
    return "" if v is None or (isinstance(v, float) and math.isnan(v)) else v


def brute_force_report(cfg, out_dir=None):
    exp = Experiment(cfg)
    if exp.f is None:
        raise ConfigError("brute-force needs a set-function problem")
    if not isinstance(exp.region, (CardinalityPolytope, PartitionMatroidPolytope)):
        raise ConfigError("brute-force needs a cardinality or partition region")
    S, value = brute_force_opt(exp.f, constraint_from_region(exp.region))
    report = {"set": sorted(S), "value": value}
    if out_dir or cfg.get("output"):
        out_dir = _out_dir(cfg, out_dir)
        _write_json(os.path.join(out_dir, "opt.json"), report)
    return report
