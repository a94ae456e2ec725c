import json
import subprocess
import sys

import numpy as np
import pytest

from asymcoh import SIGMA_Z, random_density_matrix, save_matrix
from asymcoh.cli import RunConfig, load_operator, main, run

from conftest import PLUS


@pytest.fixture
def files(tmp_path):
    paths = {}
    for name, m in {
        "plus": np.outer(PLUS, PLUS.conj()),
        "sigmaz": SIGMA_Z,
        "bell": np.outer([1, 0, 0, 1], [1, 0, 0, 1]) / 2,
        "rand": random_density_matrix(3, seed=3).matrix,
        "iy": np.array([[0.5, -0.5j], [0.5j, 0.5]]),
    }.items():
        paths[name] = str(tmp_path / f"{name}.json")
        save_matrix(paths[name], m)
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"dim": 2, "entries": [[0.45, 0], [0, 0], [0, 0], [0.45, 0]]}))
    paths["bad"] = str(bad)
    return paths


def _json(capsys, argv):
    code = main(argv + ["--no-timestamp"])
    out = capsys.readouterr()
    return code, out.out, out.err


def test_coherence_plus(files, capsys):
    code, out, _ = _json(capsys, ["coherence", "--rho", files["plus"], "--k", files["sigmaz"]])
    doc = json.loads(out)
    assert code == 0
    assert doc["command"] == "coherence" and doc["seed"] == 0 and "timestamp" not in doc
    assert doc["result"]["value"] == pytest.approx(1, abs=1e-7) and doc["result"]["converged"] is True


def test_named_operators():
    assert np.array_equal(load_operator("SigmaZ"), SIGMA_Z)
    assert np.array_equal(load_operator("diag:2,-1"), np.diag([2.0, -1.0]))
    with pytest.raises(ValueError):
        load_operator("diag:a,b")


def test_properties_table(capsys):
    code = main(["properties", "--dim", "2", "--instances", "200", "--seed", "7"])
    out = capsys.readouterr().out
    assert code == 0
    body = out.strip().split("\n")[1:]
    assert body and all(line.rstrip().endswith("pass") for line in body)


def test_trace_error_exit(files, capsys):
    code, out, err = _json(capsys, ["oracle", "--rho", files["bad"], "--k", "sigmaz"])
    assert code == 2 and out == ""
    doc = json.loads(err)
    assert doc["error"] == "TraceNotOne" and doc["deviation"] == pytest.approx(0.1)


@pytest.mark.parametrize(
    "argv",
    [
        ["oracle", "--k", "sigmaz"],
        ["oracle", "--rho", "/nonexistent.json", "--k", "sigmaz"],
        ["properties"],
        ["estimate", "--rho", "PLUS", "--k", "sigmaz", "--shots", "10"],
    ],
)
def test_invalid_inputs_exit_2(files, capsys, argv):
    argv = [files["plus"] if a == "PLUS" else a for a in argv]
    code, _, err = _json(capsys, argv)
    assert code == 2 and "error" in json.loads(err)


def test_dimension_mismatch_exit_2(files, capsys):
    code, _, err = _json(capsys, ["bounds", "--rho", files["rand"], "--k", "sigmaz"])
    assert code == 2 and json.loads(err)["error"] == "DimensionMismatch"


def test_nonconvergence_exit_3(files, capsys):
    code, out, _ = _json(capsys, ["estimate", "--rho", files["plus"], "--k", "sigmaz", "--shots", "1000", "--restarts", "1", "--max-iters", "1"])
    assert code == 3 and json.loads(out)["result"]["converged"] is False


def test_oracle_and_bounds(files, capsys):
    code, out, _ = _json(capsys, ["oracle", "--rho", files["plus"], "--k", "sigmaz"])
    doc = json.loads(out)["result"]
    assert code == 0 and doc["oracle_value"] == pytest.approx(1) and doc["normalized"] == pytest.approx(1)
    code, out, _ = _json(capsys, ["bounds", "--rho", files["iy"], "--k", "sigmaz", "--k2", "sigmax"])
    doc = json.loads(out)["result"]
    assert code == 0 and doc["uncertainty_ok"] and doc["uncertainty_lhs"] == pytest.approx(1)


def test_bounds_csv(files, capsys):
    code = main(["bounds", "--rho", files["rand"], "--k", "diag:1,0,-1", "--format", "csv"])
    header, row = capsys.readouterr().out.strip().split("\n")
    assert code == 0 and header.startswith("c_w,") and len(header.split(",")) == len(row.split(","))


def test_kd_outputs(files, capsys):
    code, out, _ = _json(capsys, ["kd", "--rho", files["plus"], "--k", "sigmaz", "--k2", "sigmax"])
    doc = json.loads(out)["result"]
    assert code == 0 and doc["dim"] == 2 and doc["marginal_error"] <= 1e-10
    main(["kd", "--rho", files["plus"], "--k", "sigmaz", "--format", "csv"])
    lines = capsys.readouterr().out.strip().split("\n")
    assert lines[0] == "k,x,re,im" and len(lines) == 5


def test_product_mode(files, capsys):
    code, out, _ = _json(capsys, ["coherence", "--rho", files["bell"], "--k", "diag:2,0,0,-2", "--dims", "2,2", "--restarts", "4"])
    doc = json.loads(out)["result"]
    assert code == 0 and doc["mode"] == "product" and doc["value"] > 0


def test_study_csv(files, capsys):
    code = main(["study", "--rho", files["plus"], "--k", "sigmaz", "--shots", "1000,10000", "--repeats", "2", "--restarts", "2", "--max-iters", "20"])
    lines = capsys.readouterr().out.strip().split("\n")
    assert code == 0 and lines[0] == "shots,mean_abs_error,stderr" and lines[-1].startswith("slope_fit,")


def test_out_file_and_roundtrip(files, tmp_path, capsys):
    target = tmp_path / "report.json"
    code = main(["oracle", "--rho", files["rand"], "--k", "diag:1,0,-1", "--out", str(target)])
    assert code == 0 and capsys.readouterr().out == ""
    doc = json.loads(target.read_text())
    assert set(doc) == {"command", "seed", "version", "result", "timestamp"}


@pytest.mark.parametrize(
    "argv",
    [
        ["coherence", "--rho", "RAND", "--k", "diag:1,0,-1", "--restarts", "3", "--seed", "11"],
        ["estimate", "--rho", "PLUS", "--k", "sigmaz", "--shots", "10000", "--restarts", "2", "--seed", "3"],
        ["properties", "--dim", "2", "--instances", "5", "--seed", "2", "--format", "json"],
    ],
)
def test_byte_identical_reruns(files, argv):
    argv = [files["plus"] if a == "PLUS" else files["rand"] if a == "RAND" else a for a in argv]
    a = run(_cfg(argv))
    b = run(_cfg(argv))
    assert a == b


def _cfg(argv):
    from asymcoh.cli import build_parser, config_from_args

    cfg = config_from_args(build_parser().parse_args(argv + ["--no-timestamp"]))
    assert isinstance(cfg, RunConfig) and cfg.timestamp is False
    return cfg


def test_module_entry_point(files):
    proc = subprocess.run(
        [sys.executable, "-m", "asymcoh", "oracle", "--rho", files["plus"], "--k", "sigmaz", "--no-timestamp"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0 and json.loads(proc.stdout)["result"]["oracle_value"] == pytest.approx(1)
