import json
import subprocess
import sys

import pytest

from pqcbounds import __version__
from pqcbounds.circuit import build_efficient_su2
from pqcbounds.cli import (
    EXIT_CAP,
    EXIT_CHECK_FAILED,
    EXIT_INVALID_CLASS,
    EXIT_OK,
    EXIT_USAGE,
    THREADS_ENV,
    depth_for,
    main,
    preset_observable,
)
from pqcbounds.estimator import CSV_COLUMNS, GRADIENT_COLUMNS
from pqcbounds.fixtures import get_fixture
from pqcbounds.qgan import WEIGHT_BOUND_COLUMNS
from pqcbounds.reporting import read_report


@pytest.fixture
def files(tmp_path):
    obs = tmp_path / "obs.txt"
    obs.write_text("1.0 ZIIIIIII\n0.5 XXXXXXXX\n")
    circ = tmp_path / "c.json"
    circ.write_text(build_efficient_su2(3, 1).to_json())
    bad = tmp_path / "bad.json"
    bad.write_text(get_fixture("non_adjacent_layers").circuit.to_json())
    return tmp_path


def run(*argv):
    return main([str(a) for a in argv])


# helpers ----------------------------------------------------------------------------

def test_presets_and_depth_rules():
    assert preset_observable("local", 3).as_dict() == {"ZII": 1.0}
    assert preset_observable("global", 3).as_dict() == {"XXX": 1.0}
    assert preset_observable("mixed", 3).as_dict() == {"ZII": 1.0, "XXX": 1.0}
    assert [depth_for("log", n) for n in (2, 4, 5, 8)] == [1, 2, 3, 3]
    assert depth_for("half", 8) == 4 and depth_for("linear", 5) == 5 and depth_for("fixed", 9, 2) == 2


# analyze ----------------------------------------------------------------------------

def test_analyze_writes_csv_rows(files):
    out = files / "r.csv"
    code = run("analyze", "--ansatz", "efficientsu2", "--n", 8, "--depth", 3, "--obs", files / "obs.txt",
               "--state", "zero", "--samples", 2000, "--seed", 1, "--out", out)
    assert code == EXIT_OK
    meta, rows = read_report(out)
    assert list(rows[0]) == list(CSV_COLUMNS)
    assert [r["alpha_label"] for r in rows] == ["ZIIIIIII", "XXXXXXXX", "aggregate"]
    assert meta["seed"] == 1 and meta["version"] == __version__
    assert meta["config"]["samples"] == 2000


def test_analyze_json_to_stdout(capsys):
    code = run("analyze", "--ansatz", "cartan", "--n", 4, "--depth", 1, "--term", "2:ZIII",
               "--samples", 500, "--format", "json")
    assert code == EXIT_OK
    data = json.loads(capsys.readouterr().out)
    assert data["rows"][0]["coeff"] == 2.0 and data["rows"][-1]["coeff"] is None


def test_mixed_preset_aggregate_between_terms(files):
    out = files / "m.csv"
    assert run("analyze", "--ansatz", "efficientsu2", "--n", 6, "--depth", 3, "--obs-preset", "mixed",
               "--samples", 4000, "--out", out) == EXIT_OK
    rows = {r["alpha_label"]: float(r["variance"]) for r in read_report(out)[1]}
    local, glob, agg = rows["ZIIIII"], rows["XXXXXX"], rows["aggregate"]
    assert agg == pytest.approx(local + glob)
    assert agg >= max(local, glob)


def test_circuit_file_and_builder_conflict(files, capsys):
    code = run("analyze", "--circuit", files / "c.json", "--n", 3, "--obs-preset", "local")
    assert code == EXIT_USAGE
    assert "conflicts" in capsys.readouterr().err


def test_observable_source_conflict(files, capsys):
    code = run("analyze", "--circuit", files / "c.json", "--obs-preset", "local", "--term", "1:ZII")
    assert code == EXIT_USAGE
    assert "conflict" in capsys.readouterr().err


def test_malformed_circuit_file_reports_line(files, capsys):
    broken = files / "broken.json"
    broken.write_text('{"n": 2, "gates": [\n {"kind": "H", "qubits": [0]},\n {"kind": "BAD", "qubits": [0]}\n]}\n')
    assert run("analyze", "--circuit", broken, "--obs-preset", "local") == EXIT_USAGE
    assert "line 3" in capsys.readouterr().err


def test_missing_file_and_bad_state(files, capsys):
    assert run("analyze", "--circuit", files / "nope.json", "--obs-preset", "local") == EXIT_USAGE
    assert run("analyze", "--circuit", files / "c.json", "--obs-preset", "local", "--state", "weird") == EXIT_USAGE
    assert run("analyze", "--circuit", files / "c.json", "--obs", files / "obs.txt") == EXIT_USAGE
    assert run("analyze", "--circuit", files / "c.json", "--obs-preset", "local", "--threads", 0) == EXIT_USAGE


def test_invalid_class_exit_and_override(files):
    assert run("analyze", "--circuit", files / "bad.json", "--term", "1:XZ", "--samples", 100) == EXIT_INVALID_CLASS
    assert run("analyze", "--circuit", files / "bad.json", "--term", "1:XZ", "--samples", 100,
               "--allow-invalid-class", "--out", files / "o.csv") == EXIT_OK


def test_unknown_command_is_usage_error(capsys):
    assert main(["frobnicate"]) == EXIT_USAGE
    assert main(["--version"]) == EXIT_OK
    assert __version__ in capsys.readouterr().out


# replay -----------------------------------------------------------------------------

@pytest.mark.parametrize("fmt", ["csv", "json"])
def test_replay_is_byte_identical(files, fmt):
    first = files / f"a.{fmt}"
    second = files / f"b.{fmt}"
    assert run("analyze", "--circuit", files / "c.json", "--obs-preset", "mixed", "--samples", 3000,
               "--seed", 4, "--format", fmt, "--out", first) == EXIT_OK
    assert run("replay", first, "--out", second, "--threads", 3) == EXIT_OK
    assert first.read_bytes() == second.read_bytes()


def test_threads_env_does_not_change_output(files, monkeypatch):
    a, b = files / "a.csv", files / "b.csv"
    assert run("sweep", "--n-list", "4,6", "--obs-preset", "global", "--samples", 5000, "--out", a) == EXIT_OK
    monkeypatch.setenv(THREADS_ENV, "4")
    assert run("sweep", "--n-list", "4,6", "--obs-preset", "global", "--samples", 5000, "--out", b) == EXIT_OK
    assert a.read_bytes() == b.read_bytes()


def test_replay_rejects_foreign_files(files):
    other = files / "x.json"
    other.write_text('{"meta": {"tool": "else"}}')
    assert run("replay", other) == EXIT_USAGE
    assert run("replay", files / "missing.csv") == EXIT_USAGE


# sweep ------------------------------------------------------------------------------

def test_sweep_variance_and_gradient(files):
    out = files / "s.csv"
    assert run("sweep", "--n-list", "4", "--obs-preset", "local", "--samples", 1000, "--out", out) == EXIT_OK
    meta, rows = read_report(out)
    assert [r["n"] for r in rows] == ["4", "4"]
    assert meta["config"]["depths"] == [2]
    out = files / "g.csv"
    assert run("sweep", "--n-list", "4,6", "--obs-preset", "mixed", "--quantity", "gradient",
               "--samples", 1000, "--out", out) == EXIT_OK
    rows = read_report(out)[1]
    assert list(rows[0]) == list(GRADIENT_COLUMNS) and len(rows) == 6


def test_sweep_depth_rule_fixed_needs_depth():
    assert run("sweep", "--n-list", "4", "--obs-preset", "local", "--depth-rule", "fixed") == EXIT_USAGE
    assert run("sweep", "--n-list", "4,x", "--obs-preset", "local") == EXIT_USAGE


# oracle -----------------------------------------------------------------------------

def test_oracle_json(files):
    out = files / "o.json"
    obs = files / "o3.txt"
    obs.write_text("1.0 ZII\n0.5 XXI\n")
    assert run("oracle", "--circuit", files / "c.json", "--obs", obs, "--samples", 2000, "--seed", 7,
               "--gradients", "--out", out) == EXIT_OK
    data = json.loads(out.read_text())
    assert data["meta"]["seed"] == 7
    assert set(data["report"]["z_scores"]) == {"mean[ZII]", "mean[XXI]", "cross[ZII*XXI]", "additivity"}
    assert len(data["report"]["gradient_variances"]) == 12


def test_oracle_cap_exit_code():
    assert run("oracle", "--ansatz", "efficientsu2", "--n", 6, "--depth", 1, "--obs-preset", "local",
               "--qubit-cap", 4, "--samples", 10) == EXIT_CAP


# qgan -------------------------------------------------------------------------------

def test_qgan_bound_passes(files):
    out = files / "q.csv"
    assert run("qgan", "bound", "--n", 4, "--layers", 2, "--width", 8, "--gamma", 0.5, "--draws", 2000,
               "--out", out) == EXIT_OK
    rows = read_report(out)[1]
    assert list(rows[0]) == list(WEIGHT_BOUND_COLUMNS) and rows[0]["pass"] == "true"


def test_qgan_bound_failure_exit_code(files, monkeypatch):
    import dataclasses

    from pqcbounds import qgan

    real = qgan.verify_weight_bound

    def failing(*args, **kwargs):
        r = real(*args, **kwargs)
        return dataclasses.replace(r, empirical=0.0, stderr=0.0)

    monkeypatch.setattr(qgan, "verify_weight_bound", failing)
    out = files / "w.csv"
    assert run("qgan", "bound", "--n", 2, "--layers", 1, "--width", 8, "--draws", 100, "--out", out) == EXIT_CHECK_FAILED
    assert read_report(out)[1][0]["pass"] == "false"


def test_qgan_spec_file_conflicts_with_flags(files):
    spec = files / "d.json"
    spec.write_text(json.dumps({"n": 2, "widths": [8], "gammas": [1.0], "sigmas": [0.7, 2.0]}))
    assert run("qgan", "bound", "--spec", spec, "--draws", 200, "--out", files / "d.csv") == EXIT_OK
    assert run("qgan", "bound", "--spec", spec, "--n", 3) == EXIT_USAGE
    assert run("qgan", "bound", "--n", 3) == EXIT_USAGE


def test_qgan_profile(files):
    out = files / "p.csv"
    assert run("qgan", "profile", "--n", 4, "--layers", 1, "--width", 8, "--k", "1,4", "--samples", 500,
               "--out", out) == EXIT_OK
    rows = read_report(out)[1]
    assert [r["k"] for r in rows] == ["1", "4"]


# counterexamples --------------------------------------------------------------------

def test_counterexamples_command(files, capsys):
    out = files / "ce.csv"
    assert run("counterexamples", "--out", out) == EXIT_OK
    rows = read_report(out)[1]
    assert all(r["passed"] == "true" for r in rows)
    assert "6/6 pass" in capsys.readouterr().err


def test_console_script_entry_point():
    res = subprocess.run([sys.executable, "-m", "pqcbounds.cli", "--version"], capture_output=True, text=True)
    assert res.returncode == 0 and __version__ in res.stdout
