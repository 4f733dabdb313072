"""Run orchestration, exports, determinism, convergence study, CLI."""

import json
import os

import numpy as np
import pytest

from chflow import RunConfig, convergence_study, run
from chflow.cli import main
from chflow.harness import evaluate_flags

CSV_COLUMNS = ["label", "beta", "x", "u", "v", "xbeta", "energy_density"]


def small_config(**kw):
    base = dict(t_end=0.05, dt=1e-3, snap_every=25, n_markers=256)
    base.update(kw)
    return RunConfig(**base)


def test_run_zero_preset_all_flags_pass(tmp_path):
    report = run("zero", small_config(), out_dir=str(tmp_path))
    assert report.flags.all_ok
    assert report.flags.energy_drift == 0.0
    names = sorted(os.path.basename(p) for p in report.out_files)
    assert names[0] == "markers_0000.csv"
    assert "run.json" in names


def test_run_flags_clean_on_smooth_gaussian():
    report = run("gaussian", RunConfig(t_end=0.5, dt=1e-3, snap_every=100,
                                       n_markers=1024))
    assert report.flags.all_ok
    assert report.flags.energy_drift <= 1e-4
    assert report.flags.max_lipschitz_x <= 1e-6
    assert report.flags.max_lipschitz_u <= 1e-6


def test_csv_schema_and_row_count(tmp_path):
    report = run("gaussian", small_config(), out_dir=str(tmp_path))
    path = os.path.join(str(tmp_path), "markers_0000.csv")
    with open(path) as fh:
        header = fh.readline().strip()
    assert header.split(",") == CSV_COLUMNS
    data = np.loadtxt(path, delimiter=",", skiprows=1)
    assert data.shape == (256, 7)
    # xbeta column really is cos^2(v/2)
    assert np.allclose(data[:, 5], np.cos(0.5 * data[:, 4]) ** 2, atol=1e-12)


def test_json_manifest_embeds_snapshots(tmp_path):
    report = run("zero", small_config(), out_dir=str(tmp_path), fmt="json")
    with open(os.path.join(str(tmp_path), "run.json")) as fh:
        manifest = json.load(fh)
    assert manifest["preset"]["name"] == "zero"
    assert manifest["all_ok"] is True
    assert {"times", "diagnostics", "acceptance_flags"} <= set(manifest)
    assert len(manifest["snapshots"]) == len(manifest["times"])
    assert manifest["snapshots"][0]["columns"] == CSV_COLUMNS
    # json format embeds markers instead of writing per-snapshot csv files
    assert not [p for p in report.out_files if "markers_" in p]


def test_trace_export(tmp_path):
    report = run("gaussian", small_config(), out_dir=str(tmp_path),
                 trace_labels=(0.25, 0.5))
    assert len(report.traces) == 2
    path = os.path.join(str(tmp_path), "trace_01.csv")
    with open(path) as fh:
        assert fh.readline().strip() == "t,beta,x,u"
    data = np.loadtxt(path, delimiter=",", skiprows=1)
    assert data.shape[1] == 4
    assert data[0, 1] == pytest.approx(0.5)


def test_runs_are_deterministic(tmp_path):
    a = tmp_path / "a"
    b = tmp_path / "b"
    run("gaussian", small_config(), out_dir=str(a))
    run("gaussian", small_config(), out_dir=str(b))
    for name in sorted(os.listdir(a)):
        with open(a / name, "rb") as fa, open(b / name, "rb") as fb:
            assert fa.read() == fb.read(), name


def test_evaluate_flags_reports_measured_values(gaussian_history):
    flags = evaluate_flags(gaussian_history)
    assert flags.finite_ok
    assert 0.0 < flags.energy_drift < 1e-3
    assert flags.max_consistency > 0.0


def test_convergence_study_orders():
    table = convergence_study()
    assert all(o >= 1.8 for o in table["spatial_orders"])
    assert all(o >= 3.5 for o in table["temporal_orders"])


def test_convergence_study_zero_data():
    table = convergence_study("zero", n_ladder=(64, 128), dt_ladder=(4e-3, 2e-3),
                              t_end=0.1)
    assert all(e == 0.0 for e in table["spatial_errors"])
    assert all(e == 0.0 for e in table["temporal_errors"])


def test_cli_run_exits_zero(tmp_path):
    code = main(["--preset", "zero", "--n-markers", "128", "--dt", "1e-3",
                 "--t-end", "0.02", "--snap-every", "10",
                 "--out", str(tmp_path), "--format", "csv"])
    assert code == 0
    assert (tmp_path / "run.json").exists()


def test_cli_trace_flag(tmp_path):
    code = main(["--preset", "gaussian", "--n-markers", "256", "--dt", "1e-3",
                 "--t-end", "0.02", "--snap-every", "10", "--trace", "0.5",
                 "--out", str(tmp_path)])
    assert code == 0
    assert (tmp_path / "trace_00.csv").exists()


def test_cli_param_and_span(tmp_path):
    code = main(["--preset", "gaussian", "--param", "amplitude=0.3",
                 "--n-markers", "256", "--dt", "1e-3", "--t-end", "0.02",
                 "--snap-every", "10", "--beta-span=-25:25",
                 "--out", str(tmp_path)])
    assert code == 0


def test_cli_rejects_bad_config():
    with pytest.raises(SystemExit) as exc:
        main(["--preset", "not_a_preset"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        main(["--preset", "zero", "--beta-span", "5:-5"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        main(["--preset", "zero", "--param", "amplitude"])
    assert exc.value.code == 2


def test_cli_failing_flags_exit_one(tmp_path):
    # a strict energy tolerance cannot hold on a coarse breaking run
    code = main(["--preset", "gaussian", "--param", "amplitude=2.0",
                 "--n-markers", "256", "--dt", "1e-3", "--t-end", "1.5",
                 "--snap-every", "100", "--energy-tol", "1e-12",
                 "--out", str(tmp_path)])
    assert code == 1
