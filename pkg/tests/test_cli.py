import csv
import io
import json
import math
import subprocess
import sys

import pytest

from curvmass.cli import COEFF_CSV_COLUMNS, EXIT_CHECK_FAILED, EXIT_COMPUTE, EXIT_CONFIG, POLARIZED_COLUMNS, run
from curvmass.mass import MASS_CSV_COLUMNS


def invoke(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run(list(argv), stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


def rows(text):
    return list(csv.reader(io.StringIO(text)))


def test_one_harmonic_sds():
    code, out, _ = invoke("one-harmonic", "--profile", "sds", "--lambda", "3", "--m", "0.1")
    assert code == 0
    data = json.loads(out)
    assert data["value"] == pytest.approx(0.1, abs=1e-12)
    assert "derivation" in data


def test_coeffs_csv():
    code, out, _ = invoke("coeffs", "--lambda", "3", "--p", "1.5", "--t-min", "-1", "--t-max", "1", "--samples", "3")
    assert code == 0
    table = rows(out)
    assert tuple(table[0]) == COEFF_CSV_COLUMNS
    assert len(table) == 4
    # full round-trip precision
    assert all("e" in v and len(v.split("e")[0]) >= 19 for v in table[1])
    alpha = float(table[2][1])
    assert alpha == pytest.approx(0.5873433344441267, rel=1e-12)


def test_coeffs_routes_agree(tmp_path):
    args = ["coeffs", "--lambda", "3", "--p", "2", "--t-min", "-3", "--t-max", "3", "--samples", "5"]
    _, closed, _ = invoke(*args, "--route", "closed-form")
    _, ode, _ = invoke(*args, "--route", "ode")
    for a, b in zip(rows(closed)[1:], rows(ode)[1:]):
        assert float(a[2]) == pytest.approx(float(b[2]), abs=1e-8)


def test_mass_writes_files(tmp_path):
    code, _, _ = invoke("mass", "--profile", "constant-curvature", "--a", "1.1", "--lambda", "3",
                        "--p", "2,1.5", "--samples", "4", "--out", str(tmp_path))
    assert code == 0
    files = sorted(f.name for f in tmp_path.iterdir())
    assert len(files) == 2
    table = rows((tmp_path / files[0]).read_text())
    assert tuple(table[0]) == MASS_CSV_COLUMNS
    masses = [float(r[5]) for r in table[1:]]
    assert masses == sorted(masses)


def test_polarized_json():
    code, out, _ = invoke("polarized", "--lambda", "3", "--p", "2")
    assert code == 0
    data = json.loads(out)
    assert abs(data["total"]) < 2e-5
    assert data["finiteness"]["holds"] is True


def test_sweep_threads(monkeypatch):
    monkeypatch.setenv("CURVMASS_THREADS", "2")
    code, out, _ = invoke("sweep", "--lambda", "1,3", "--p", "1.5,2")
    assert code == 0
    table = rows(out)
    assert tuple(table[0]) == POLARIZED_COLUMNS
    assert [(float(r[0]), float(r[1])) for r in table[1:]] == [(1, 1.5), (1, 2), (3, 1.5), (3, 2)]


def test_sweep_json_coefficients():
    code, out, _ = invoke("sweep", "--quantity", "coefficients", "--t", "0", "--lambda=-3,0,3",
                          "--p", "2", "--format", "json")
    assert code == 0
    data = json.loads(out)
    assert [d["Lambda"] for d in data] == [-3.0, 0.0, 3.0]
    assert data[1]["exp_lambda"] == pytest.approx(1 / (8 * math.pi), rel=1e-14)


def test_config_file_and_flag_precedence(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# sample\nlambda = 3\np = 1.5\nsamples = 2\nt-min = -1\nt-max = 1\n")
    _, from_file, _ = invoke("coeffs", "--config", str(cfg))
    _, overridden, _ = invoke("coeffs", "--config", str(cfg), "--p", "2")
    assert from_file != overridden
    _, direct, _ = invoke("coeffs", "--lambda", "3", "--p", "2", "--samples", "2", "--t-min", "-1", "--t-max", "1")
    assert overridden == direct


def test_all_config_errors_reported_together(tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("bogus = 1\nthis line is wrong\n")
    code, _, err = invoke("mass", "--config", str(cfg), "--p", "4", "--samples", "0", "--profile", "torus")
    assert code == EXIT_CONFIG
    for fragment in ("unknown key 'bogus'", "expected 'key = value'", "outside (1, 3)",
                     "samples", "unknown kind 'torus'"):
        assert fragment in err


def test_missing_profile_parameters():
    code, _, err = invoke("mass", "--profile", "perturbed")
    assert code == EXIT_CONFIG
    assert "epsilon" in err
    code, _, err = invoke("mass", "--profile", "sds", "--m", "0.1")
    assert code == EXIT_CONFIG


def test_computation_error_exit_code(tmp_path):
    code, _, err = invoke("mass", "--profile", "tabulated", "--profile-path", str(tmp_path / "missing.csv"))
    assert code == EXIT_COMPUTE
    assert "computation error" in err


def test_verify_selection_and_tolerance():
    code, out, _ = invoke("verify", "--check", "hawking-anchors", "--check", "sds-one-harmonic")
    assert code == 0
    report = json.loads(out)
    assert [c["id"] for c in report["checks"]] == ["sds-one-harmonic", "hawking-anchors"]
    assert report["summary"] == {"pass": 2, "fail": 0}
    assert set(report["checks"][0]) == {"id", "desc", "anchor", "value", "target", "tol", "pass", "ms"}
    code, out, _ = invoke("verify", "--check", "hawking-anchors", "--tol", "hawking-anchors=1e-30")
    assert code == EXIT_CHECK_FAILED
    assert json.loads(out)["checks"][0]["tol"] == 1e-30


def test_verify_unknown_check():
    code, _, err = invoke("verify", "--check", "nonsense")
    assert code == EXIT_CONFIG
    assert "available" in err


def test_plot_svg(tmp_path):
    code, _, _ = invoke("plot", "--kind", "mass", "--profile", "constant-curvature", "--a", "1.1",
                        "--p", "2", "--samples", "5", "--out", str(tmp_path))
    assert code == 0
    svg = (tmp_path / "mass.svg").read_text()
    assert svg.startswith("<svg") and "<polyline" in svg
    code, _, err = invoke("plot", "--kind", "p-trend")
    assert code == EXIT_CONFIG and "t:" in err


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "curvmass.cli", "--version"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert proc.stdout.startswith("curvmass ")


def test_sweep_one_harmonic_sds():
    code, out, _ = invoke("sweep", "--quantity", "one-harmonic", "--profile", "sds", "--m", "0.1",
                          "--lambda", "3,1", "--p", "2")
    assert code == 0
    assert [float(r[2]) for r in rows(out)[1:]] == pytest.approx([0.1, 0.1], abs=1e-12)


def test_identical_config_gives_identical_output(tmp_path, monkeypatch):
    monkeypatch.setenv("CURVMASS_THREADS", "3")
    args = ("sweep", "--lambda", "0.3,3", "--p", "1.3,2.7", "--quantity", "coefficients", "--t", "1")
    assert invoke(*args)[1] == invoke(*args)[1]
    args = ("mass", "--profile", "perturbed", "--epsilon", "0.2", "--p", "2", "--samples", "5")
    assert invoke(*args)[1] == invoke(*args)[1]
