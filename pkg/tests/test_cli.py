import csv
import json

import numpy as np
import pytest

from biperiodic import cli

SLAB = """
material: {family: slab, eps: 4.0, thickness: 0.3, h: 1.0}
source: {k: 1.2, theta: 0.3, phi: 0.2, psi: 0.4}
discretization: {N: 1, M: 32}
export: {resolution: 8, nz: 3}
scan: {k_min: 0.8, k_max: 1.6, count: 5}
"""

VACUUM = """
material: {family: constant}
source: {k: 1.0}
discretization: {N: 1, M: 16}
export: {resolution: 4, nz: 2}
"""


def _run(tmp_path, text, command, name="out", extra=()):
    cfg = tmp_path / "run.yaml"
    cfg.write_text(text)
    out = tmp_path / name
    code = cli.main([command, "--config", str(cfg), "--out", str(out), *extra])
    return code, out


def _csv(path):
    lines = path.read_text().splitlines()
    assert lines[0] == "# schema_version=1"
    return list(csv.DictReader(lines[1:]))


def test_solve_outputs(tmp_path):
    code, out = _run(tmp_path, SLAB, "solve")
    assert code == 0
    man = json.loads((out / "manifest.json").read_text())
    assert man["status"] == "ok" and man["command"] == "solve"
    assert set(man["outputs"]) == {"rayleigh.json", "flux.csv", "field.bin", "field.json", "manifest.json"}
    assert man["config"]["discretization"]["M"] == 32
    head = json.loads((out / "field.json").read_text())
    raw = np.frombuffer((out / "field.bin").read_bytes(), dtype="<c16")
    assert raw.size == int(np.prod(head["shape"]))
    rows = _csv(out / "flux.csv")
    assert abs(sum(float(r["relative_flux"]) for r in rows) - 1) < 2e-3
    ray = json.loads((out / "rayleigh.json").read_text())
    assert len(ray["modes"]) == 9


def test_vacuum_solve_is_zero(tmp_path):
    code, out = _run(tmp_path, VACUUM, "solve")
    assert code == 0
    assert np.all(np.frombuffer((out / "field.bin").read_bytes(), dtype="<c16") == 0)
    rows = _csv(out / "flux.csv")
    assert sum(float(r["relative_flux"]) for r in rows) == pytest.approx(1, abs=1e-14)


def test_reruns_are_byte_identical(tmp_path):
    _, a = _run(tmp_path, SLAB, "solve", "a")
    _, b = _run(tmp_path, SLAB, "solve", "b")
    for f in a.iterdir():
        assert f.read_bytes() == (b / f.name).read_bytes(), f.name


def test_check_material(tmp_path):
    text = "material: {family: example, lambda: 0.01, h1: 0.3, h2: 0.6, h: 1.0}\n"
    code, out = _run(tmp_path, text, "check-material")
    assert code == 0
    assert json.loads((out / "conditions.json").read_text())["status"] == "PASS"
    text = "material: {family: example, lambda: 10, h1: 0.3, h2: 0.6, h: 1.0}\n"
    code, out = _run(tmp_path, text, "check-material", "b")
    assert code == 0
    assert json.loads((out / "conditions.json").read_text())["status"] == "FAIL"


def test_scan_k(tmp_path):
    code, out = _run(tmp_path, SLAB, "scan-k")
    assert code == 0
    rows = _csv(out / "scan.csv")
    assert len(rows) == 5 and all(float(r["sigma_min"]) > 0 for r in rows)
    ks = [float(r["k"]) for r in rows]
    assert ks == sorted(ks)


def test_scan_k_empty_range(tmp_path):
    code, out = _run(tmp_path, SLAB.replace("count: 5", "count: 0"), "scan-k")
    assert code == 0
    lines = (out / "scan.csv").read_text().splitlines()
    assert lines == ["# schema_version=1", "k,sigma_min,threshold_flag"]


def test_scan_threads_do_not_change_output(tmp_path):
    _, a = _run(tmp_path, SLAB, "scan-k", "a")
    _, b = _run(tmp_path, SLAB, "scan-k", "b", ("--threads", "2"))
    assert (a / "scan.csv").read_bytes() == (b / "scan.csv").read_bytes()


def test_oracle_compare(tmp_path):
    code, out = _run(tmp_path, SLAB, "oracle-compare")
    assert code == 0
    payload = json.loads((out / "oracle_compare.json").read_text())
    assert payload["relative_error"] < 5e-3


def test_audit(tmp_path):
    text = (
        "material: {family: example, lambda: 0.5, h1: 0.25, h2: 0.5, h: 1.0, chi: {kind: smooth}, smooth_vertical: true}\n"
        "audit: {random_fields: 5, poincare_samples: 20, garding_samples: 5, garding_k: [1.0], identity_elements: [8, 16], lateral: 16}\n"
        "discretization: {N: 1, M: 8}\n"
    )
    code, out = _run(tmp_path, text, "audit")
    assert code == 0
    payload = json.loads((out / "audits.json").read_text())
    assert {"curl_decomposition", "poincare", "garding"} <= set(payload)


def test_bad_config_reports_line(tmp_path, capsys):
    code, _ = _run(tmp_path, "material:\n  family: slab\n  eps: 4\n  thickness: -1\n  h: 1\n", "solve")
    assert code == 2
    assert "run.yaml:4:" in capsys.readouterr().err


def test_missing_source_is_config_error(tmp_path):
    code, out = _run(tmp_path, "material: {family: constant}\n", "solve")
    assert code == 2
    assert json.loads((out / "diagnostics.json").read_text())["kind"] == "config"


def test_missing_file(tmp_path, capsys):
    assert cli.main(["solve", "--config", str(tmp_path / "nope.yaml")]) == 2


def test_numerical_failure_writes_diagnostics(tmp_path, monkeypatch):
    import biperiodic.solver as solver

    def boom(system, tol=1e-10):
        raise solver.SingularSystemError("matrix close to singular", 3e-14)

    monkeypatch.setattr(solver, "solve", boom)
    code, out = _run(tmp_path, SLAB, "solve")
    assert code == 1
    diag = json.loads((out / "diagnostics.json").read_text())
    assert diag["sigma_min"] == pytest.approx(3e-14)
    assert json.loads((out / "manifest.json").read_text())["status"] == "error"
