#!/usr/bin/env python
"""
Tests for the persuasion-detect command line
"""

import json
import math

import numpy as np
import pytest

import cli


def run(capsys, *argv):
    code = cli.main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_solve_defaults(capsys):
    code, out, _ = run(capsys, "solve")
    assert code == cli.EXIT_OK
    document = json.loads(out)
    assert document["n_p_star"] == 7
    assert document["tau_no"] == 5
    assert document["binding_constraint_time"] == 5
    assert document["obedience_satisfied"] is True
    assert document["dp_certified"] is True
    assert document["manifest"]["command"] == "solve"
    assert document["manifest"]["timestamp"] == "1970-01-01T00:00:00+00:00"


def test_solve_free_waiting(capsys):
    code, out, _ = run(capsys, "solve", "--c", "0", "--T", "12")
    assert code == cli.EXIT_OK
    document = json.loads(out)
    assert (document["n_p_star"], document["q_star"]) == (12, 1.0)
    assert document["optimal_utility"] == 12.0


def test_solve_fast_matches(capsys):
    _, full, _ = run(capsys, "solve", "--mu", "0.5", "--q", "0.1", "--c", "0.5", "--T", "20")
    _, fast, _ = run(capsys, "solve", "--mu", "0.5", "--q", "0.1", "--c", "0.5", "--T", "20", "--fast")
    full_doc, fast_doc = json.loads(full), json.loads(fast)
    for key in ("n_p_star", "q_star", "optimal_utility", "tau_no"):
        assert full_doc[key] == fast_doc[key]


def test_solve_rejects_bad_prior(capsys):
    code, out, err = run(capsys, "solve", "--mu", "1.5")
    assert code == cli.EXIT_DOMAIN
    assert out == ""
    assert "--mu" in err


def test_manifest_timestamp_follows_source_date_epoch(monkeypatch):
    monkeypatch.setenv("SOURCE_DATE_EPOCH", "86400")
    assert cli.manifest_timestamp() == "1970-01-02T00:00:00+00:00"


def test_benchmarks_surely_bad_start(capsys):
    code, out, _ = run(capsys, "benchmarks", "--mu", "0", "--c", "0.3", "--T", "10")
    assert code == cli.EXIT_OK
    document = json.loads(out)
    assert document["optimal_utility"] == 0.0
    assert document["improvement_pct"] is None


def test_benchmarks_reference_instance(capsys):
    code, out, _ = run(capsys, "benchmarks", "--c", "0.3", "--T", "20")
    assert code == cli.EXIT_OK
    document = json.loads(out)
    assert document["static_utility"] >= document["full_info_utility"]
    assert document["optimal_utility"] >= document["best_benchmark"] - 1e-9
    assert document["static_dp_obeys"] is True


def test_verify_rejects_large_enumeration(capsys):
    code, _, err = run(capsys, "verify", "--T", "20", "--mode", "enumerate")
    assert code == cli.EXIT_SCALE
    assert "T <= 10" in err


def test_verify_single_instance(capsys):
    code, out, _ = run(capsys, "verify", "--T", "4")
    assert code == cli.EXIT_OK
    document = json.loads(out)
    assert document["passed"] is True
    assert document["instances"] == 1
    assert document["failures"] == []


def test_verify_small_grid(capsys):
    code, out, _ = run(capsys, "verify", "--grid", "small")
    document = json.loads(out)
    assert code == cli.EXIT_OK, document["failures"]
    assert document["instances"] == 16
    checks = {row["check"] for row in document["summary"]}
    assert {"solver_vs_oracle", "fast_vs_full", "tau_no", "dp_vs_enumeration[optimal]"} <= checks


def test_simulate_full_information(capsys):
    code, out, _ = run(capsys, "simulate", "--policy", "full-info", "--T", "10", "--episodes", "300")
    assert code == cli.EXIT_OK
    document = json.loads(out)
    assert document["report"]["false_alarm_rate"] == 0.0
    assert document["report"]["mean_detector_cost"] == 0.0
    assert document["manifest"]["seed"] == 0


def test_simulate_is_byte_identical_for_a_seed(capsys):
    argv = ("simulate", "--policy", "static", "--T", "10", "--episodes", "400", "--seed", "17")
    _, first, _ = run(capsys, *argv)
    _, second, _ = run(capsys, *argv)
    assert first == second


def test_simulate_best_response_closed_form(capsys):
    code, out, _ = run(
        capsys, "simulate", "--policy", "no-info", "--mode", "dp_best_response", "--T", "20", "--episodes", "200"
    )
    assert code == cli.EXIT_OK
    document = json.loads(out)
    assert document["report"]["mean_principal_utility"] == 4.0
    assert document["closed_form"]["principal_utility"] == pytest.approx(4.0)


def test_simulate_unknown_policy(capsys):
    code, _, err = run(capsys, "simulate", "--policy", "bogus", "--episodes", "10")
    assert code == cli.EXIT_DOMAIN
    assert "--policy" in err


def test_simulate_policy_file(tmp_path, capsys):
    path = tmp_path / "mechanism.json"
    path.write_text(json.dumps({"n_p": 3, "q_np": 0.5}), encoding="utf-8")
    code, out, _ = run(capsys, "simulate", "--policy", str(path), "--T", "6", "--episodes", "200")
    assert code == cli.EXIT_OK
    assert json.loads(out)["policy"] == str(path)


def test_simulate_rejects_noisy_policy_for_best_response(tmp_path, capsys):
    path = tmp_path / "noisy.json"
    path.write_text(json.dumps({"rho_g": [0.5, 1.0], "rho_b": [0.0, 0.0]}), encoding="utf-8")
    code, _, _ = run(capsys, "simulate", "--policy", str(path), "--T", "2", "--mode", "dp_best_response", "--episodes", "5")
    assert code == cli.EXIT_DOMAIN


def test_sweep_writes_table(tmp_path, capsys):
    target = tmp_path / "utility.csv"
    code, out, _ = run(capsys, "sweep", "--mode", "utility-vs-c", "--points", "3", "--T", "10", "--out", str(target))
    assert code == cli.EXIT_OK
    document = json.loads(out)
    assert document["table"] == str(target)
    assert document["summary"]["points"] == 3
    lines = target.read_text(encoding="utf-8").splitlines()
    assert lines[0] == "# manifest.command: sweep"
    assert sum(1 for line in lines if not line.startswith("# ")) == 4


def test_sweep_patience_fix_parsing(tmp_path, capsys):
    target = tmp_path / "patience.csv"
    code, out, _ = run(capsys, "sweep", "--mode", "patience", "--fix", "q=0.1", "--grid", "4", "--T", "30", "--out", str(target))
    assert code == cli.EXIT_OK
    assert json.loads(out)["summary"]["cells"] == 16

    code, _, err = run(capsys, "sweep", "--mode", "patience", "--fix", "T=3")
    assert code == cli.EXIT_DOMAIN
    assert "--fix" in err


def test_sweep_unknown_mode():
    with pytest.raises(SystemExit) as err:
        cli.main(["sweep", "--mode", "heatmap"])
    assert err.value.code == 2


def test_round_floats():
    document = {"a": 1 / 3, "b": [np.float64(2.0), float("nan")], "c": np.bool_(True), "d": np.int64(4), "e": "x"}
    assert cli.round_floats(document) == {"a": 0.333333333333, "b": [2.0, None], "c": True, "d": 4, "e": "x"}
    assert cli.round_floats(math.inf) is None


def test_sweep_and_verify_are_byte_identical_across_worker_counts(tmp_path, capsys, monkeypatch):
    monkeypatch.setattr("experiments.base_sweep.ROWS_PER_JOB", 5)
    target = tmp_path / "patience.csv"
    tables, reports = [], []
    for workers in (1, 2):
        monkeypatch.setattr("workers.WORKERS", workers)
        code, _, _ = run(capsys, "sweep", "--mode", "patience", "--fix", "c=0.1", "--grid", "4", "--T", "30", "--out", str(target))
        assert code == cli.EXIT_OK
        tables.append(target.read_bytes())
        code, out, _ = run(capsys, "verify", "--grid", "small")
        assert code == cli.EXIT_OK
        reports.append(out)
    assert tables[0] == tables[1]
    assert reports[0] == reports[1]
