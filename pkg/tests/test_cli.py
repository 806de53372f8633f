import json
import math
import subprocess
import sys

import numpy as np
import pytest

from oscnet import ConfigError, __version__
from oscnet.cli import main
from oscnet.scenarios import builtin_scenarios, load_scenario, resolve_scenario, run_scenario, validate, with_overrides

UNDAMPED = """\
name = "undamped"
figure = "none"
observables = ["recurrence", "swap", "entropy_joint"]

[system]
omega10 = 1.0
omega20 = 1.0
lambda = 1.0

[initial_state]
kind = "product_cat"
alpha = 0.5
eta = 0.5

[grid]
t_max = 6.283185307179586
samples = 201

[oracle]
truncation = 14
dt = 1e-3
t_max = 3.141592653589793
points = 4
"""

LOPSIDED = """\
name = "lopsided"

[system]
omega10 = 1.0
omega20 = 1.0
lambda = 1.0
gamma1 = 0.6
gamma2 = 0.0
regime = "strong"
enforce_coupling_guard = false

[initial_state]
alpha = 0.5
eta = 0.5

[oracle]
t_max = 3.0
points = 4
"""


def write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def test_list_builtins(capsys):
    assert main(["list-builtins"]) == 0
    out = capsys.readouterr().out
    for name in ("fig4a", "fig4b", "fig4c", "fig4d", "fig4e", "fig4f", "fig5", "fig6", "fig7a", "fig7b",
                 "fig8a", "fig8b"):
        assert name in out


def test_every_builtin_carries_figure_tag():
    for name, s in builtin_scenarios().items():
        assert s.figure and s.figure.startswith("Fig.")


def test_run_writes_csv_and_manifest(tmp_path):
    assert main(["run", "fig4a", "--out", str(tmp_path)]) == 0
    d = tmp_path / "fig4a"
    lines = (d / "recurrence.csv").read_text().splitlines()
    assert lines[0] == "t,lambda_t,value"
    assert len(lines) == 4002
    t, lt, v = map(float, lines[-1].split(","))
    assert lt == pytest.approx(4 * math.pi)
    assert t == pytest.approx(4 * math.pi / 0.02)
    m = json.loads((d / "manifest.json").read_text())
    assert m["version"] == __version__
    assert m["figure"] == "Fig. 4(a)"
    assert "wall_clock_seconds" in m["timing"]
    assert "Lambda" in m["coefficients"]
    assert sorted(m["files"]) == ["recurrence.csv", "swap.csv"]


def test_recurrence_peaks_at_multiples_of_pi(tmp_path):
    main(["run", "fig4a", "--out", str(tmp_path)])
    data = np.loadtxt(tmp_path / "fig4a" / "recurrence.csv", delimiter=",", skiprows=1)
    lt, pr = data[:, 1], data[:, 2]
    for k in (1, 2, 3):
        i = np.argmin(np.abs(lt - k * np.pi))
        assert pr[i] == pytest.approx(pr[max(i - 5, 0):i + 6].max())


def test_csv_output_is_byte_identical(tmp_path):
    path = write(tmp_path, "undamped.toml", UNDAMPED)
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["run", path, "--out", str(a)]) == 0
    assert main(["run", path, "--out", str(b)]) == 0
    for name in ("recurrence.csv", "swap.csv", "entropy_joint.csv"):
        x = (a / "undamped" / name).read_bytes()
        assert x == (b / "undamped" / name).read_bytes()
        assert b"\r" not in x
    row = (a / "undamped" / "recurrence.csv").read_text().splitlines()[2]
    assert all(format(float(f), ".17g") == f for f in row.split(","))


def test_out_directory_from_environment(tmp_path, monkeypatch):
    monkeypatch.setenv("OSCNET_OUT", str(tmp_path / "env"))
    assert main(["run", "fig7a"]) == 0
    assert (tmp_path / "env" / "fig7a" / "find_cat_mode1.csv").exists()


def test_parallel_jobs(tmp_path):
    assert main(["run", "fig7a", "fig7b", "--jobs", "2", "--out", str(tmp_path)]) == 0
    assert (tmp_path / "fig7a" / "manifest.json").exists()
    assert (tmp_path / "fig7b" / "manifest.json").exists()


def test_fig5_series(tmp_path):
    main(["run", "fig5", "--out", str(tmp_path)])
    names = json.loads((tmp_path / "fig5" / "manifest.json").read_text())["files"]
    assert sorted(names) == sorted(["coherence_joint.csv", "coherence_mode1.csv", "coherence_mode2.csv",
                                    "coherence_isolated1.csv"])


def test_fig8b_entropy_returns_to_zero(tmp_path):
    main(["run", "fig8b", "--out", str(tmp_path)])
    s12 = np.loadtxt(tmp_path / "fig8b" / "entropy_joint.csv", delimiter=",", skiprows=1)[:, 2]
    assert s12[0] == pytest.approx(0.0, abs=1e-12)
    assert s12.max() > 0.1
    assert s12[-1] < 1e-3


def test_fig4f_manifest_records_drive(tmp_path):
    m = run_scenario(builtin_scenarios()["fig4f"], tmp_path)
    p = m["parameters"]
    assert p["F_over_omega20"] == pytest.approx(1.0, rel=1e-3)
    assert p["omega_drive_over_omega10"] == pytest.approx(1e-2)
    # detuned drive: Omega - lambda = 1.0002 - 0.01 - 0.02
    assert p["F_over_Omega_minus_lambda"] == pytest.approx(p["F"] / 0.9702, rel=1e-12)


def test_validate_undamped_scenario_is_tight(tmp_path, capsys):
    path = write(tmp_path, "undamped.toml", UNDAMPED)
    assert main(["validate", path]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["max_trace_distance"] <= 1e-8
    assert report["passed"] is True


def test_validate_fig5(capsys):
    assert main(["validate", "fig5", "--alpha", "0.8", "--trunc", "16"]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["max_trace_distance"] <= 1e-3


def test_validation_failure_exit_code(tmp_path):
    # strongly unequal damping: the closed form is only good to second order in gamma / lambda
    path = write(tmp_path, "lopsided.toml", LOPSIDED)
    assert main(["validate", path]) == 1
    assert main(["run", path, "--oracle", "--out", str(tmp_path)]) == 1


def test_small_truncation_names_minimum(capsys):
    assert main(["validate", "fig5", "--alpha", "1", "--trunc", "3"]) == 2
    err = capsys.readouterr().err
    assert "minimum N = 15" in err


def test_unknown_scenario_is_config_error(capsys):
    assert main(["run", "fig99"]) == 2
    assert "fig99" in capsys.readouterr().err


def test_config_error_reports_file_and_line(tmp_path, capsys):
    bad = UNDAMPED.replace("lambda = 1.0", "lambda = 1.0\nlamda = 2.0")
    path = write(tmp_path, "bad.toml", bad)
    assert main(["run", path, "--out", str(tmp_path)]) == 2
    assert "bad.toml:9" in capsys.readouterr().err


def test_unknown_observable_rejected(tmp_path):
    path = write(tmp_path, "bad.toml", UNDAMPED.replace('"entropy_joint"', '"entropy_total"'))
    with pytest.raises(ConfigError):
        load_scenario(path)


def test_overrides():
    s = with_overrides(resolve_scenario("fig5"), alpha=0.8, truncation=16, dt=1e-3, oracle=True)
    assert s.initial_state.alpha == 0.8 and s.initial_state.eta == 0.8
    assert (s.oracle.truncation, s.oracle.dt, s.oracle.enabled) == (16, 1e-3, True)


def test_validate_report_fields(tmp_path):
    s = load_scenario(write(tmp_path, "undamped.toml", UNDAMPED))
    r = validate(s)
    assert r["truncation"] == 14
    assert len(r["trace_distance"]) == 4
    assert r["lambda_t"][-1] == pytest.approx(math.pi)


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "oscnet", "list-builtins"], capture_output=True, text=True)
    assert out.returncode == 0 and "fig6" in out.stdout
