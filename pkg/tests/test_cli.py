import json
import math
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from cwlsim.cli import main
from cwlsim.serialize import dumps_json, read_density_matrix, write_json


def write_config(tmp_path, doc, name="config.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc), encoding="utf-8")
    return path


BASE = {
    "system": {"alpha": 0.7, "kappa": 1.0, "Gamma": 0.0, "gamma_D": 0.0, "M": 0},
    "bin": {"t0": 0.2, "tau": 0.8},
}


def test_simulate_writes_outputs_and_manifest(tmp_path):
    cfg = write_config(tmp_path, BASE)
    out = tmp_path / "out"
    assert main(["simulate", "--config", str(cfg), "--out", str(out)]) == 0
    man = json.loads((out / "manifest.json").read_text())
    assert man["subcommand"] == "simulate"
    assert man["diagnostics"]["coherent_fidelity"] >= 0.9999
    listed = {Path(p).name for p in man["outputs"]}
    assert {"trajectory.csv", "rho_v.json"} <= listed
    for p in man["outputs"]:
        assert Path(p).exists()
    # trajectory CSV has a header row and LF endings
    raw = (out / "trajectory.csv").read_bytes()
    assert b"\r" not in raw
    assert raw.decode().splitlines()[0] == "t,cavity_n"


def test_manifest_config_roundtrip(tmp_path):
    cfg = write_config(tmp_path, BASE)
    out1 = tmp_path / "o1"
    assert main(["simulate", "--config", str(cfg), "--out", str(out1)]) == 0
    man = json.loads((out1 / "manifest.json").read_text())
    snap = man["config"]
    # re-run from the manifest's config snapshot
    cfg2 = write_config(tmp_path, snap, name="snap.json")
    out2 = tmp_path / "o2"
    assert main(["simulate", "--config", str(cfg2), "--out", str(out2)]) == 0
    assert (out1 / "rho_v.json").read_bytes() == (out2 / "rho_v.json").read_bytes()
    assert (out1 / "trajectory.csv").read_bytes() == (out2 / "trajectory.csv").read_bytes()


def test_wigner_subcommand(tmp_path):
    doc = {
        "system": {"alpha": 0.9, "M": 1},
        "bin": {"t0": 1.0, "tau": 2.0},
    }
    cfg = write_config(tmp_path, doc)
    out = tmp_path / "out"
    assert main(["wigner", "--config", str(cfg), "--out", str(out)]) == 0
    wdoc = json.loads((out / "wigner.json").read_text())
    assert wdoc["negativity"] > 0.01
    header = (out / "wigner.csv").read_text().splitlines()[0]
    assert header == "x,p,W"


def test_shortbin_check_subcommand(tmp_path):
    doc = {"system": {"alpha": 0.9, "M": 1}, "bin": {"t0": 1.5, "tau": 1e-3}}
    cfg = write_config(tmp_path, doc)
    out = tmp_path / "out"
    assert main(["shortbin-check", "--config", str(cfg), "--out", str(out)]) == 0
    rep = json.loads((out / "shortbin_report.json").read_text())
    assert rep["trace_distance_integrator_vs_closed"] < 5e-3
    assert rep["max_entry_closed_vs_oracle"] < 1e-8


def test_ansatz_subcommand(tmp_path):
    doc = {"system": {"alpha": 0.9, "M": 1}, "bin": {"t0": 1.0, "tau": 2.0}}
    cfg = write_config(tmp_path, doc)
    out = tmp_path / "out"
    assert main(["ansatz", "--config", str(cfg), "--out", str(out)]) == 0
    fit = json.loads((out / "ansatz.json").read_text())
    assert fit["fidelity"] > 0.99
    assert len(fit["weights"]) == 3


def test_metrology_subcommand(tmp_path):
    doc = {
        "system": {"alpha": 0.18, "M": 1, "gamma_D": 0.1},
        "bin": {"t0": 2.0, "tau": 5.0},
        "metrology": {"N_b": 100.0, "phi_points": 500},
    }
    cfg = write_config(tmp_path, doc)
    out = tmp_path / "out"
    assert main(["metrology", "--config", str(cfg), "--out", str(out)]) == 0
    res = json.loads((out / "metrology.json").read_text())
    assert abs(res["improvement"] - 0.10) < 0.03
    assert res["squeezed_improvement"] > res["improvement"]
    assert (out / "jz_curves.csv").exists()


def test_sweep_subcommand(tmp_path):
    doc = {
        "system": {"alpha": 0.9, "M": 1},
        "bin": {"t0": 1.0, "tau": 2.0},
        "sweep": {"axes": {"tau": [0.4, 2.0]}, "objective": "negativity"},
    }
    cfg = write_config(tmp_path, doc)
    out = tmp_path / "out"
    assert main(["sweep", "--config", str(cfg), "--out", str(out)]) == 0
    rows = json.loads((out / "sweep.json").read_text())
    assert len(rows) == 2
    assert rows[0]["objective"] >= rows[1]["objective"]
    assert Path(rows[0]["artifact"]).exists()


def test_config_error_exit_code(tmp_path):
    cfg = write_config(tmp_path, {"system": {"alpha": 0.5, "kappa": -1.0}})
    assert main(["simulate", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 1
    missing = tmp_path / "nope.json"
    assert main(["simulate", "--config", str(missing), "--out", str(tmp_path / "o")]) == 1


def test_unknown_flag_reports_usage():
    proc = subprocess.run(
        [sys.executable, "-m", "cwlsim.cli", "simulate", "--bogus"],
        capture_output=True, text=True,
    )
    assert proc.returncode == 1
    assert "usage" in proc.stderr.lower()


def test_float_serialization_roundtrip():
    vals = [0.1, 1 / 3, math.pi, 1e-17, 123456.789012345678]
    text = dumps_json({"vals": vals})
    back = json.loads(text)
    assert back["vals"] == vals  # 17 significant digits round-trip exactly


def test_density_matrix_file_roundtrip(tmp_path):
    from cwlsim.hilbert import coherent_state, pure_density

    dm = pure_density(coherent_state(0.6, 8))
    from cwlsim.serialize import write_density_matrix

    path = tmp_path / "rho.json"
    write_density_matrix(dm, path)
    back = read_density_matrix(path)
    assert np.array_equal(back.mat, dm.mat)
    doc = json.loads(path.read_text())
    assert doc["kind"] == "density_matrix"
    assert doc["layout"] == "row-major"
