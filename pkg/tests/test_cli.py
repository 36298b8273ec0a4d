"""Batch front-end: dispatch, config validation, artifact determinism."""

import json
import os

import pytest

from loghardy import cli


def _write_cfg(tmp_path, name, payload):
    path = tmp_path / name
    path.write_text(json.dumps(payload))
    return str(path)


@pytest.fixture()
def eigen_cfg(tmp_path):
    return _write_cfg(tmp_path, "eigen.json", {
        "domain": {"kind": "disk", "radius": 1.0},
        "weights": {"a": 1.2},
        "mesh": {"target_h": 0.25, "grading_q": 0.6, "rings": 4,
                 "refinements": 0},
        "a_list": [1.2],
        "outputs": {"dir": str(tmp_path / "out")},
    })


def test_eigen_produces_artifacts(eigen_cfg, tmp_path):
    rc = cli.main(["eigen", "--config", eigen_cfg])
    assert rc == 0
    out = tmp_path / "out"
    for name in ("lambda.json", "eigvec.csv", "oracle_compare.json"):
        assert (out / name).exists()
    doc = json.loads((out / "lambda.json").read_text())
    assert doc["schema_version"] == 1
    assert doc["config"]["command"] == "eigen"
    assert doc["results"][0]["converged"]


def test_byte_reproducible_outputs(eigen_cfg, tmp_path):
    assert cli.main(["eigen", "--config", eigen_cfg]) == 0
    out = tmp_path / "out"
    first = {p.name: p.read_bytes() for p in out.iterdir()}
    assert cli.main(["eigen", "--config", eigen_cfg]) == 0
    second = {p.name: p.read_bytes() for p in out.iterdir()}
    assert first == second


def test_set_overrides(eigen_cfg, tmp_path):
    rc = cli.main(["eigen", "--config", eigen_cfg,
                   "--set", "a_list=[1.5]",
                   "--out", str(tmp_path / "out2")])
    assert rc == 0
    doc = json.loads((tmp_path / "out2" / "lambda.json").read_text())
    assert doc["results"][0]["a"] == 1.5
    assert doc["config"]["a_list"] == [1.5]


def test_config_error_exit_code(tmp_path, capsys):
    bad = _write_cfg(tmp_path, "bad.json", {
        "domain": {"kind": "dodecahedron"},
        "outputs": {"dir": str(tmp_path / "o")},
    })
    rc = cli.main(["eigen", "--config", bad])
    assert rc == 3
    err = capsys.readouterr().err
    assert "domain.kind" in err


def test_missing_config_file(tmp_path):
    rc = cli.main(["eigen", "--config", str(tmp_path / "nope.json")])
    assert rc == 3


def test_command_mismatch_is_config_error(eigen_cfg, tmp_path):
    rc = cli.main(["robin", "--config", eigen_cfg,
                   "--set", "command=eigen"])
    assert rc == 3


def test_admissible_finds_pairs(tmp_path):
    cfg = _write_cfg(tmp_path, "adm.json",
                     {"outputs": {"dir": str(tmp_path / "adm")}})
    assert cli.main(["admissible", "--config", cfg]) == 0
    doc = json.loads((tmp_path / "adm" / "admissible.json").read_text())
    assert doc["n_admissible"] >= 1
    rows = (tmp_path / "adm" / "admissible.csv").read_text().splitlines()
    assert rows[0] == "a,L,integral,admissible"
    assert len(rows) == doc["n_pairs"] + 1


def test_robin_report(tmp_path):
    cfg = _write_cfg(tmp_path, "robin.json", {
        "domain": {"kind": "disk", "radius": 1.0},
        "weights": {"a": 2.0},
        "mesh": {"target_h": 0.25, "grading_q": 0.5, "rings": 5},
        "beta": {"type": "constant", "value": 1.0},
        "outputs": {"dir": str(tmp_path / "rb")},
    })
    assert cli.main(["robin", "--config", cfg]) == 0
    doc = json.loads((tmp_path / "rb" / "robin.json").read_text())
    assert doc["lambda"] > 0.0
    assert doc["bound_holds"]
    assert doc["sign_definite_eigenvector"]


def test_threads_env_respected(eigen_cfg, tmp_path, monkeypatch):
    monkeypatch.setenv("LOGHARDY_THREADS", "1")
    assert cli.main(["eigen", "--config", eigen_cfg,
                     "--out", str(tmp_path / "serial")]) == 0
    assert cli._threads() == 1


def test_pencil_table(tmp_path):
    cfg = _write_cfg(tmp_path, "pencil.json", {
        "domain": {"kind": "disk", "radius": 1.0},
        "weights": {"a": 2.0},
        "mesh": {"target_h": 0.3, "grading_q": 0.5, "rings": 4},
        "epsilons": [0.5],
        "outputs": {"dir": str(tmp_path / "pc")},
    })
    assert cli.main(["pencil", "--config", cfg]) == 0
    doc = json.loads((tmp_path / "pc" / "pencil.json").read_text())
    row = doc["table"][0]
    assert row["c_trace"] >= 2.0 - 5e-2  # constant-function lower bound
