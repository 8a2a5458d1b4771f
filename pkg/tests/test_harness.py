import csv
import json

import numpy as np
import pytest

from nobliv_cg import cli
from nobliv_cg.harness import load_config, run_experiment
from nobliv_cg.exceptions import ConfigError

COVERAGE = {
    "problem": {"family": "coverage", "params": {"random": True, "d": 8, "seed": 1}},
    "region": {"type": "cardinality", "k": 3},
    "solver": {"kind": "scg_pp", "T": 40, "schedule": "multilinear"},
    "seeds": {"master": 7, "replications": 1},
}
QUAD = {
    "problem": {"family": "quadratic", "params": {"center": [0.5, 0.5]}},
    "region": {"type": "box", "lower": 0.0, "upper": 1.0, "dim": 2},
    "solver": {"kind": "sfw_convex", "T": 16},
}


def _write(tmp_path, cfg, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(cfg))
    return str(path)


def _rows(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_run_coverage_trace_and_ratio(tmp_path):
    out = tmp_path / "out"
    assert cli.main(["run", "--config", _write(tmp_path, COVERAGE), "--out", str(out)]) == 0
    rows = _rows(out / "trace_seed7.csv")
    assert rows[0] == ["t", "eta", "batch_anchor", "batch_path", "oracle_calls", "f_value",
                       "f_is_exact", "fw_gap", "gap_is_exact", "wallclock_ms"]
    assert len(rows) == 1 + 41 and all(len(r) == 10 for r in rows)
    assert [int(r[0]) for r in rows[1:]] == list(range(41))
    summary = json.loads((out / "summary_seed7.json").read_text())
    assert summary["ratio"] >= 1 - 1 / np.e - 0.05
    assert summary["oracle_calls"] == int(rows[-1][4])
    assert (out / "opt.json").exists()


def test_run_missing_file_exit_2(capsys):
    assert cli.main(["run", "--config", "/no/such/config.json"]) == 2
    assert "not found" in capsys.readouterr().err


def test_run_bad_json_exit_2(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text("{not json")
    assert cli.main(["run", "--config", str(p)]) == 2


def test_run_unknown_family_exit_2(tmp_path):
    cfg = dict(COVERAGE, problem={"family": "nope"})
    assert cli.main(["run", "--config", _write(tmp_path, cfg)]) == 2


def test_run_zero_replications_exit_2(tmp_path):
    cfg = dict(COVERAGE, seeds={"master": 0, "replications": 0})
    with pytest.raises(ConfigError):
        load_config(_write(tmp_path, cfg))


def test_replications_deterministic(tmp_path):
    cfg = dict(COVERAGE, seeds={"master": 3, "replications": 3})
    path = _write(tmp_path, cfg)
    cli.main(["run", "--config", path, "--out", str(tmp_path / "a")])
    cli.main(["run", "--config", path, "--out", str(tmp_path / "b")])
    for s in (3, 4, 5):
        a = (tmp_path / "a" / f"trace_seed{s}.csv").read_bytes()
        assert a == (tmp_path / "b" / f"trace_seed{s}.csv").read_bytes()
    assert (tmp_path / "a" / "trace_seed3.csv").read_bytes() != \
        (tmp_path / "a" / "trace_seed4.csv").read_bytes()


def test_seed_override(tmp_path):
    cli.main(["run", "--config", _write(tmp_path, COVERAGE), "--seed", "11",
              "--out", str(tmp_path)])
    assert (tmp_path / "trace_seed11.csv").exists()


def test_output_relative_to_config(tmp_path):
    cfg = dict(QUAD, output="results")
    run_experiment(load_config(_write(tmp_path, cfg)))
    assert (tmp_path / "results" / "trace_seed0.csv").exists()


def test_sweep_convex_T_decreasing(tmp_path):
    path = _write(tmp_path, QUAD)
    assert cli.main(["sweep", "--config", path, "--param", "T", "--values", "16,32,64,128",
                     "--out", str(tmp_path)]) == 0
    rows = list(csv.DictReader(open(tmp_path / "sweep_T.csv")))
    sub = [float(r["suboptimality"]) for r in rows]
    assert all(b < a for a, b in zip(sub, sub[1:]))


def test_sweep_oracle_calls_match_schedule(tmp_path):
    path = _write(tmp_path, COVERAGE)
    cli.main(["sweep", "--config", path, "--param", "epsilon", "--values", "0.5,1.0,2.0",
              "--out", str(tmp_path)])
    for r in csv.DictReader(open(tmp_path / "sweep_epsilon.csv")):
        assert r["oracle_calls"] == r["planned_oracle_calls"]


def test_sweep_empty_values_exit_2(tmp_path):
    assert cli.main(["sweep", "--config", _write(tmp_path, QUAD), "--param", "T",
                     "--values", ""]) == 2


def test_check_unknown_suite_usage_error():
    with pytest.raises(SystemExit) as exc:
        cli.main(["check", "nonsense"])
    assert exc.value.code == 2


def test_check_estimators_passes(capsys):
    assert cli.main(["check", "estimators"]) == 0
    out = capsys.readouterr().out
    assert "FAIL" not in out and out.count("PASS") >= 5


def test_brute_force_coverage_k1(tmp_path, capsys):
    cfg = {"problem": {"family": "coverage", "params": {"cover": [[True], [True]],
                                                        "weights": [[1.0]]}},
           "region": {"type": "cardinality", "k": 1}, "solver": {"kind": "scg_pp", "T": 2}}
    assert cli.main(["brute-force", "--config", _write(tmp_path, cfg)]) == 0
    assert json.loads(capsys.readouterr().out) == {"set": [0], "value": 1.0}


def test_brute_force_k0_and_csv_weights(tmp_path, capsys):
    (tmp_path / "w.csv").write_text("1,2,3\n0.5,0.5,0.5\n")
    cfg = {"problem": {"family": "modular", "params": {"weights_csv": "w.csv"}},
           "region": {"type": "cardinality", "k": 0}, "solver": {"kind": "scg_pp", "T": 2}}
    assert cli.main(["brute-force", "--config", _write(tmp_path, cfg)]) == 0
    assert json.loads(capsys.readouterr().out) == {"set": [], "value": 0.0}


def test_brute_force_size_limit_exit_4(tmp_path):
    cfg = {"problem": {"family": "modular", "params": {"random": True, "d": 21}},
           "region": {"type": "cardinality", "k": 2}, "solver": {"kind": "scg_pp", "T": 2}}
    assert cli.main(["brute-force", "--config", _write(tmp_path, cfg)]) == 4


def test_thread_env_does_not_change_trace(tmp_path, monkeypatch):
    cfg = {"problem": {"family": "gaussian", "params": {"dim": 3}},
           "region": {"type": "box", "lower": 0.0, "upper": 1.0, "dim": 3},
           "solver": {"kind": "sfw_convex", "T": 8, "eval_samples": 100}}
    path = _write(tmp_path, cfg)
    monkeypatch.setenv("NOBLIV_CG_THREADS", "1")
    cli.main(["run", "--config", path, "--out", str(tmp_path / "one")])
    monkeypatch.setenv("NOBLIV_CG_THREADS", "3")
    cli.main(["run", "--config", path, "--out", str(tmp_path / "three")])
    assert (tmp_path / "one" / "trace_seed0.csv").read_bytes() == \
        (tmp_path / "three" / "trace_seed0.csv").read_bytes()
