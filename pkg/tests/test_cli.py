"""CLI front end: config handling, outputs, exit codes, reproducibility."""

import json
import os

import numpy as np

from levymv.cli import main


def write_config(tmp_path, payload, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(payload))
    return str(path)


SIM_CFG = {
    "command": "simulate",
    "seed": 5,
    "n_particles": 5000,
    "dt": 0.1,
    "horizon": 0.5,
    "driver": {"kind": "stable", "alpha": 1.5, "scale": 1.0},
    "sigma": {"kind": "constant", "value": 1.0},
    "initial": {"kind": "point", "x0": 0.0},
    "record_every": 5,
}


class TestArgumentHandling:
    def test_no_command_prints_usage(self, capsys):
        assert main([]) == 2

    def test_missing_config_and_preset(self, capsys):
        assert main(["simulate"]) == 2

    def test_unknown_preset(self, capsys):
        assert main(["simulate", "--preset", "nope"]) == 2

    def test_config_and_preset_conflict(self, tmp_path, capsys):
        cfg = write_config(tmp_path, SIM_CFG)
        assert main(["simulate", cfg, "--preset", "AC1"]) == 2

    def test_command_mismatch_rejected(self, tmp_path, capsys):
        cfg = write_config(tmp_path, SIM_CFG)
        assert main(["pde", cfg]) == 2

    def test_seed_required(self, tmp_path, capsys):
        payload = dict(SIM_CFG)
        del payload["seed"]
        cfg = write_config(tmp_path, payload)
        assert main(["simulate", cfg]) == 2


class TestSimulateCommand:
    def test_outputs_and_cf_check(self, tmp_path, capsys):
        cfg = write_config(tmp_path, SIM_CFG)
        out = str(tmp_path / "run")
        assert main(["simulate", cfg, "--out", out]) == 0
        assert os.path.exists(os.path.join(out, "flow.csv"))
        assert os.path.exists(os.path.join(out, "final_kde.csv"))
        resolved = json.load(open(os.path.join(out, "config.resolved.json")))
        assert resolved["seed"] == 5 and resolved["command"] == "simulate"
        summary = json.load(open(os.path.join(out, "summary.json")))
        assert summary["cf_test"]["pass"] is True
        assert summary["pass"] is True

    def test_rerun_is_byte_identical(self, tmp_path, capsys):
        cfg = write_config(tmp_path, SIM_CFG)
        out1, out2 = str(tmp_path / "r1"), str(tmp_path / "r2")
        assert main(["simulate", cfg, "--out", out1]) == 0
        assert main(["simulate", cfg, "--out", out2]) == 0
        for name in ("flow.csv", "final_kde.csv", "summary.json"):
            a = open(os.path.join(out1, name), "rb").read()
            b = open(os.path.join(out2, name), "rb").read()
            assert a == b, name

    def test_seed_override_changes_draws(self, tmp_path, capsys):
        cfg = write_config(tmp_path, SIM_CFG)
        out1, out2 = str(tmp_path / "s1"), str(tmp_path / "s2")
        assert main(["simulate", cfg, "--out", out1]) == 0
        assert main(["simulate", cfg, "--seed", "6", "--out", out2]) == 0
        a = open(os.path.join(out1, "flow.csv")).read()
        b = open(os.path.join(out2, "flow.csv")).read()
        assert a != b


class TestPdeCommand:
    def test_zero_coefficient_keeps_snapshots_at_initial(self, tmp_path, capsys):
        payload = {
            "command": "pde", "seed": 1,
            "grid": {"half_width": 8.0, "points": 128},
            "initial": {"kind": "gaussian", "mean": 0.0, "std": 1.0},
            "alpha": 1.5, "diffusivity": 1.0,
            "sigma": {"kind": "constant", "value": 0.0},
            "dt": 0.01, "horizon": 0.1, "snapshots": 2,
        }
        cfg = write_config(tmp_path, payload)
        out = str(tmp_path / "pde0")
        assert main(["pde", cfg, "--out", out]) == 0
        from levymv.exports import density_stack_from_binary
        times, rows = density_stack_from_binary(os.path.join(out, "snapshots.bin"))
        for row in rows[1:]:
            assert np.array_equal(row, rows[0])
        summary = json.load(open(os.path.join(out, "summary.json")))
        assert summary["mass_max_drift"] <= 1e-9

    def test_linear_config_reports_error_vs_exact(self, tmp_path, capsys):
        payload = {
            "command": "pde", "seed": 1,
            "grid": {"half_width": 8.0, "points": 128},
            "initial": {"kind": "gaussian", "mean": 0.0, "std": 0.5},
            "alpha": 1.2, "diffusivity": 1.0,
            "sigma": {"kind": "constant", "value": 1.0},
            "dt": 0.01, "horizon": 0.5, "snapshots": 2,
            "boundary_density_tol": 1e-2,
        }
        cfg = write_config(tmp_path, payload)
        out = str(tmp_path / "pdelin")
        assert main(["pde", cfg, "--out", out]) == 0
        summary = json.load(open(os.path.join(out, "summary.json")))
        assert summary["max_error_vs_exact"] < 1e-6

    def test_stability_failure_exits_nonzero(self, tmp_path, capsys):
        payload = {
            "command": "pde", "seed": 1,
            "grid": {"half_width": 8.0, "points": 256},
            "initial": {"kind": "gaussian", "mean": 0.0, "std": 1.0},
            "alpha": 1.8, "diffusivity": 1.0,
            "sigma": {"kind": "constant", "value": 1.0},
            "dt": 0.05, "horizon": 0.5, "snapshots": 2,
        }
        cfg = write_config(tmp_path, payload)
        assert main(["pde", cfg, "--out", str(tmp_path / "bad")]) == 1


class TestChaosCommand:
    def test_degenerate_constant_sigma(self, tmp_path, capsys):
        payload = {
            "command": "chaos-rate", "seed": 2,
            "driver": {"kind": "stable", "alpha": 1.5, "scale": 0.5},
            "truncation": 2.0,
            "sigma": {"kind": "constant", "value": 1.0},
            "initial": {"kind": "gaussian", "mean": 0.0, "std": 1.0},
            "dt": 0.1, "horizon": 0.3,
            "n_list": [10, 20, 40, 80], "reps": 3, "n_ref": 800,
        }
        cfg = write_config(tmp_path, payload)
        out = str(tmp_path / "chaos0")
        assert main(["chaos-rate", cfg, "--out", out]) == 0
        slope = json.load(open(os.path.join(out, "slope.json")))
        assert slope["status"] == "degenerate: all-zero"
        assert slope["fitted_slope"] is None
        table = open(os.path.join(out, "table.csv")).read().splitlines()
        assert table[0] == "n,mean_sq_gap,stderr" and len(table) == 5

    def test_failed_slope_criterion_exits_nonzero(self, tmp_path, capsys):
        payload = {
            "command": "chaos-rate", "seed": 3,
            "driver": {"kind": "stable", "alpha": 1.5, "scale": 0.5},
            "truncation": 2.0,
            "sigma": {"kind": "linear_sine", "c0": 1.0, "c1": 0.5},
            "initial": {"kind": "gaussian", "mean": 0.0, "std": 1.0},
            "dt": 0.1, "horizon": 0.3,
            "n_list": [10, 20, 40, 80], "reps": 3, "n_ref": 800,
            "slope_max": -5.0,
        }
        cfg = write_config(tmp_path, payload)
        assert main(["chaos-rate", cfg, "--out", str(tmp_path / "chaosf")]) == 1


class TestCompareCommand:
    def test_l1_table_over_snapshots(self, tmp_path, capsys):
        payload = {
            "command": "compare", "seed": 9,
            "driver": {"kind": "stable", "alpha": 1.5, "scale": 1.0},
            "sigma": {"kind": "smoothed_power", "eps": 0.5, "s": 0.5},
            "initial": {"kind": "gaussian", "mean": 0.0, "std": 1.0},
            "horizon": 0.2,
            "particles": {"n_list": [500, 4000], "dt": 0.01},
            "pde": {"grid": {"half_width": 20.0, "points": 512}, "dt": 0.005,
                    "boundary_density_tol": 1e-3},
            "kde_eps": 0.02,
            "snapshots": 2,
        }
        cfg = write_config(tmp_path, payload)
        out = str(tmp_path / "cmp")
        assert main(["compare", cfg, "--out", out]) == 0
        lines = open(os.path.join(out, "l1_by_n.csv")).read().splitlines()
        assert lines[0] == "n,time,l1_distance"
        assert len(lines) == 1 + 2 * 2  # two sizes x two snapshot times
        summary = json.load(open(os.path.join(out, "summary.json")))
        assert summary["decreasing_in_n_at_horizon"] is True

    def test_non_gaussian_initial_rejected(self, tmp_path, capsys):
        payload = {
            "command": "compare", "seed": 9,
            "driver": {"kind": "stable", "alpha": 1.5, "scale": 1.0},
            "sigma": {"kind": "smoothed_power", "eps": 0.5, "s": 0.5},
            "initial": {"kind": "point", "x0": 0.0},
            "horizon": 0.2,
            "particles": {"n_list": [100, 200], "dt": 0.01},
            "pde": {"grid": {"half_width": 20.0, "points": 512}, "dt": 0.005},
        }
        cfg = write_config(tmp_path, payload)
        assert main(["compare", cfg, "--out", str(tmp_path / "cmpbad")]) == 1


class TestValidateAndH1Commands:
    def test_sampler_battery_small(self, tmp_path, capsys):
        payload = {
            "command": "validate-sampler", "seed": 4,
            "batteries": ["cf", "gaussian_moments", "distance_bound"],
            "cf": {"alphas": [1.5], "scale": 1.0, "n_samples": 100000,
                   "xi_grid": [0.5, 1.0, 2.0], "tolerance": 0.02},
            "gaussian_moments": {"scale": 1.0, "n_samples": 200000},
            "distance_bound": {"trials": 500, "n_min": 2, "n_max": 16,
                               "tolerance": 1e-12},
        }
        cfg = write_config(tmp_path, payload)
        out = str(tmp_path / "val")
        assert main(["validate-sampler", cfg, "--out", out]) == 0
        summary = json.load(open(os.path.join(out, "summary.json")))
        assert summary["cf"]["rows"][0]["pass"] is True
        assert summary["gaussian_moments"]["pass"] is True
        assert summary["distance_bound"]["violations"] == 0

    def test_check_h1_pass_and_fail_exit_codes(self, tmp_path, capsys):
        good = write_config(tmp_path, {
            "command": "check-h1", "seed": 1, "alpha": 1.5, "gamma": 1.0,
            "eps": 0.01, "k1_bound": 1.0}, name="good.json")
        assert main(["check-h1", good, "--out", str(tmp_path / "h1ok")]) == 0
        bad = write_config(tmp_path, {
            "command": "check-h1", "seed": 1, "alpha": 1.5, "gamma": 1.0,
            "eps": 0.25, "k1_bound": 1.0}, name="bad.json")
        assert main(["check-h1", bad, "--out", str(tmp_path / "h1bad")]) == 1
        report = json.load(open(os.path.join(str(tmp_path / "h1bad"),
                                             "report.json")))
        assert report["all_passed"] is False
