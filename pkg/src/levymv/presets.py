"""Shipped experiment presets, one per acceptance-style criterion.

Each preset is a full config for one CLI subcommand; ``levymv <cmd>
--preset NAME`` loads it.  AC2/AC3 are measure-module batteries and run
under ``validate-sampler``; AC9 is the duality battery and runs under
``pde``.  AC11 (determinism) is procedural: rerun AC4 with different
``--threads`` and byte-compare the outputs.
"""

PRESETS = {
    "AC1": {
        "command": "validate-sampler",
        "seed": 20240801,
        "batteries": ["cf"],
        "cf": {
            "alphas": [0.8, 1.2, 1.5, 1.9, 2.0],
            "scale": 1.0,
            "n_samples": 1000000,
            "xi_grid": [0.25, 0.5, 1.0, 2.0, 4.0],
            "tolerance": 5.0e-3,
        },
    },
    "AC2": {
        "command": "validate-sampler",
        "seed": 20240802,
        "batteries": ["lemma4"],
        "lemma4": {
            "n_values": [10, 100, 1000],
            "reps": 200,
            "n_ref": 1000000,
            "bound": 4.0,
        },
    },
    "AC3": {
        "command": "validate-sampler",
        "seed": 20240803,
        "batteries": ["distance_bound"],
        "distance_bound": {
            "trials": 10000,
            "n_min": 2,
            "n_max": 64,
            "tolerance": 1.0e-12,
        },
    },
    "AC4": {
        "command": "chaos-rate",
        "seed": 20240804,
        "driver": {"kind": "stable", "alpha": 1.5, "scale": 0.5},
        "truncation": 2.0,
        "sigma": {"kind": "linear_sine", "c0": 1.0, "c1": 0.5},
        "initial": {"kind": "gaussian", "mean": 0.0, "std": 1.0},
        "dt": 0.02,
        "horizon": 1.0,
        "n_list": [50, 100, 200, 400, 800],
        "reps": 20,
        "n_ref": 8000,
        "slope_max": -0.8,
    },
    "AC5": {
        "command": "chaos-rate",
        "seed": 20240805,
        "driver": {"kind": "stable", "alpha": 1.5, "scale": 0.5},
        "truncation": 2.0,
        "sigma": {"kind": "smoothed_power", "eps": 0.5, "s": 0.5},
        "initial": {"kind": "gaussian", "mean": 0.0, "std": 1.0},
        "dt": 0.02,
        "horizon": 1.0,
        "n_list": [50, 100, 200, 400, 800],
        "reps": 20,
        "n_ref": 8000,
        "slope_max": -0.3,
        "require_monotone": True,
    },
    "AC6": {
        "command": "pde",
        "seed": 20240806,
        "grid": {"half_width": 20.0, "points": 512},
        "initial": {"kind": "gaussian", "mean": 0.0, "std": 1.0},
        "alpha": 1.5,
        "diffusivity": 1.0,
        "sigma": {"kind": "smoothed_power", "eps": 0.5, "s": 0.5},
        "dt": 0.004,
        "horizon": 0.25,
        "snapshots": 5,
        "scheme": "rk4",
        "boundary_density_tol": 1.0e-3,
        "mass_tolerance": 1.0e-9,
    },
    "AC7": {
        "command": "pde",
        "seed": 20240807,
        "grid": {"half_width": 8.0, "points": 128},
        "initial": {"kind": "gaussian", "mean": 0.0, "std": 0.5},
        "sigma": {"kind": "constant", "value": 1.0},
        "diffusivity": 1.0,
        "horizon": 1.0,
        "scheme": "rk4",
        "boundary_density_tol": 1.0e-2,
        "mass_tolerance": 1.0e-9,
        "linear_oracle": {
            "cases": [{"alpha": 1.2, "dt": 0.02}, {"alpha": 1.8, "dt": 0.004}],
            "sup_tolerance": 1.0e-6,
            "order_ratio_range": [12.0, 20.0],
        },
    },
    "AC8": {
        "command": "compare",
        "seed": 20240808,
        "driver": {"kind": "stable", "alpha": 1.5, "scale": 1.0},
        "sigma": {"kind": "smoothed_power", "eps": 0.5, "s": 0.5},
        "initial": {"kind": "gaussian", "mean": 0.0, "std": 1.0},
        "horizon": 0.5,
        "particles": {"n_list": [1000, 10000, 100000], "dt": 0.005},
        "pde": {"grid": {"half_width": 30.0, "points": 1024}, "dt": 0.004,
                "boundary_density_tol": 1.0e-3},
        "kde_eps": 0.01,
        "l1_max_at_largest": 0.05,
    },
    "AC9": {
        "command": "pde",
        "seed": 20240809,
        "grid": {"half_width": 8.0, "points": 1024},
        "initial": {"kind": "gaussian", "mean": 0.0, "std": 1.0},
        "alpha": 1.5,
        "diffusivity": 1.0,
        "sigma": {"kind": "constant", "value": 1.0},
        "adjoint_checks": {
            "tolerance": 1.0e-4,
            "cases": [
                {"sigma": {"kind": "constant", "value": 1.0},
                 "phi": {"center": 0.0, "width": 2.5},
                 "psi": {"center": 0.0, "width": 2.5}},
                {"sigma": {"kind": "constant", "value": 1.7},
                 "phi": {"center": -1.0, "width": 2.5},
                 "psi": {"center": 1.2, "width": 2.2}},
                {"sigma": {"kind": "smoothed_power", "eps": 0.5, "s": 0.5},
                 "phi": {"center": -1.0, "width": 2.5},
                 "psi": {"center": 1.2, "width": 2.2}},
            ],
        },
    },
    "AC10": {
        "command": "check-h1",
        "seed": 20240810,
        "alpha": 1.5,
        "gamma": 1.0,
        "eps": 0.01,
        "k1_bound": 1.0,
        "resolutions": [256, 512, 1024, 2048],
    },
}
