"""Particle engine: exactness controls, hand-rolled oracles, couplings."""

import math

import numpy as np
import pytest
from scipy.stats import ks_2samp

from levymv.coefficients import (Constant, LinearInteraction, SineKernel,
                                 SmoothedDensityPower)
from levymv.drivers import LevyTripletSpec, StableDriverSpec
from levymv.exports import (chaos_table_to_csv, flow_from_binary, flow_to_binary,
                            flow_to_csv)
from levymv.measures import EmpiricalMeasure, second_moment, wasserstein2
from levymv.particles import (ChaosRateTable, FileLaw, GaussianLaw, MarginalFlow,
                              ParticleState, PointMass, SimulationConfig,
                              SimulationError, UniformLaw, chaos_rate_experiment,
                              initial_positions, picard_flow, simulate,
                              simulate_coupled, step_frozen_flow, step_increments,
                              step_interacting)
from levymv.rng import substream


def make_cfg(**kw):
    base = dict(n_particles=100, dt=0.05, horizon_T=0.5, seed=42,
                driver=StableDriverSpec(1.5, 0.5),
                sigma=LinearInteraction(SineKernel(1.0, 0.5)),
                initial_law=GaussianLaw(0.0, 1.0), truncation_N=2.0)
    base.update(kw)
    return SimulationConfig(**base)


class TestStepping:
    def test_zero_coefficient_freezes_positions(self):
        cfg = make_cfg(sigma=Constant(0.0, check_nonzero=False))
        state = ParticleState(0.0, initial_positions(cfg))
        new = step_interacting(state, cfg, substream(1))
        assert np.array_equal(new.positions, state.positions)
        assert new.time == pytest.approx(cfg.dt_effective)

    def test_pure_drift_driver_moves_deterministically(self):
        driver = LevyTripletSpec(gaussian_a=0.0, drift_b=1.0)
        cfg = make_cfg(driver=driver, sigma=Constant(1.0), dt=0.5, horizon_T=0.5,
                       truncation_N=None)
        state = ParticleState(0.0, initial_positions(cfg))
        new = step_interacting(state, cfg, substream(2))
        assert np.allclose(new.positions - state.positions, 0.5)

    def test_two_particle_hand_rolled_update(self):
        cfg = make_cfg(n_particles=2, seed=7)
        x0 = initial_positions(cfg)
        dz = step_increments(cfg, 0, n=2)
        # sigma(x_i, mu) = 1 + 0.5 * mean_j sin(x_i - x_j)
        sig = np.array([1.0 + 0.5 * np.mean(np.sin(xi - x0)) for xi in x0])
        expected = x0 + sig * dz
        flow = simulate(cfg)
        got = np.sort(expected)
        assert np.allclose(flow.marginals[1].samples, got, atol=1e-14)

    def test_frozen_flow_equals_interacting_for_constant_sigma(self):
        cfg = make_cfg(sigma=Constant(1.3))
        x0 = initial_positions(cfg)
        ext = EmpiricalMeasure(substream(3).normal(5.0, 2.0, 64))
        a = step_interacting(ParticleState(0.0, x0), cfg, substream(4, 0))
        b = step_frozen_flow(ParticleState(0.0, x0), ext, cfg, substream(4, 0))
        assert np.array_equal(a.positions, b.positions)

    def test_frozen_flow_self_consistency(self):
        # feeding the system its own marginal with the same increments
        # reproduces the interacting step
        cfg = make_cfg(seed=11)
        x0 = initial_positions(cfg)
        own = EmpiricalMeasure(x0)
        a = step_interacting(ParticleState(0.0, x0), cfg, substream(5, 1))
        b = step_frozen_flow(ParticleState(0.0, x0), own, cfg, substream(5, 1))
        assert np.array_equal(a.positions, b.positions)

    def test_one_particle_frozen_step_hand_check(self):
        cfg = make_cfg(n_particles=1, sigma=SmoothedDensityPower(0.5, 0.5), seed=9,
                       sigma_mode="exact")
        x0 = initial_positions(cfg)
        ext = EmpiricalMeasure([0.0, 1.0])
        new = step_frozen_flow(ParticleState(0.0, x0), ext, cfg, substream(6))
        base = 0.5 * (math.exp(-x0[0] ** 2) + math.exp(-(x0[0] - 1.0) ** 2)) \
            / math.sqrt(2 * math.pi * 0.5)
        sig = base ** 0.5
        # same substream key, so this draw equals what the step consumed
        from levymv.drivers import sample_increment_array
        dz = sample_increment_array(cfg.effective_driver, cfg.dt_effective, 1,
                                    substream(6), truncation=cfg.effective_truncation)
        assert new.positions[0] == pytest.approx(x0[0] + sig * dz[0], rel=1e-12)

    def test_nonfinite_positions_abort(self):
        driver = LevyTripletSpec(gaussian_a=0.0, drift_b=1e308)
        cfg = make_cfg(driver=driver, sigma=Constant(1e308), dt=1.0, horizon_T=2.0,
                       truncation_N=None)
        with pytest.raises(SimulationError):
            simulate(cfg)


class TestSimulate:
    def test_constant_sigma_terminal_law_is_stable(self):
        # X_T = x0 + c * Z_T exactly, so the empirical CF must match
        cfg = make_cfg(n_particles=200_000, dt=0.1, horizon_T=1.0, seed=21,
                       driver=StableDriverSpec(1.5, 1.0), sigma=Constant(0.8),
                       initial_law=PointMass(0.0), truncation_N=None)
        flow = simulate(cfg, record_every=10)
        z = flow.final().samples
        for xi in (0.5, 1.0, 2.0):
            expected = math.exp(-1.0 * abs(0.8 * xi) ** 1.5)
            gap = abs(np.exp(1j * xi * z).mean() - expected)
            assert gap < 4.0 / math.sqrt(z.size) + 1e-3

    def test_constant_sigma_has_no_discretization_error(self):
        # halving dt leaves the terminal law unchanged
        base = dict(n_particles=50_000, horizon_T=1.0, seed=22,
                    driver=StableDriverSpec(1.5, 1.0), sigma=Constant(1.0),
                    initial_law=PointMass(0.0), truncation_N=None)
        a = simulate(SimulationConfig(dt=0.1, **base), record_every=10)
        b = simulate(SimulationConfig(dt=0.05, **base), record_every=20)
        assert ks_2samp(a.final().samples, b.final().samples).pvalue > 0.01

    def test_terminal_position_is_initial_plus_sigma_times_increment_sum(self):
        cfg = make_cfg(sigma=Constant(0.7), seed=23)
        flow = simulate(cfg)
        total = np.zeros(cfg.n_particles)
        for k in range(cfg.n_steps):
            total += step_increments(cfg, k)
        expected = np.sort(initial_positions(cfg) + 0.7 * total)
        assert np.allclose(flow.final().samples, expected, atol=1e-10)

    def test_second_moment_within_linear_envelope(self):
        # independent centered increments: m(t) <= m(0) + B^2 v t with
        # B = sup sigma and v = driver variance per unit time
        cfg = make_cfg(n_particles=20_000, dt=0.02, horizon_T=1.0, seed=24)
        flow = simulate(cfg)
        from levymv.drivers import sample_triplet_increments
        tot, _ = sample_triplet_increments(cfg.effective_driver, 1.0, 200_000,
                                           substream(25))
        v = float(tot.var())
        bound_sigma = 1.5  # sup of 1 + 0.5 sin
        m0 = second_moment(flow.marginals[0])
        for t, marg in zip(flow.times, flow.marginals):
            envelope = m0 + bound_sigma ** 2 * v * t
            assert second_moment(marg) <= envelope * 1.15 + 0.05, t

    def test_determinism_same_seed_same_bytes(self, tmp_path):
        cfg = make_cfg(seed=26)
        a, b = simulate(cfg), simulate(cfg)
        pa, pb = tmp_path / "a.bin", tmp_path / "b.bin"
        flow_to_binary(a, pa)
        flow_to_binary(b, pb)
        assert pa.read_bytes() == pb.read_bytes()

    def test_exchangeability_under_relabeling(self):
        # relabeling particles and their increments relabels trajectories
        cfg = make_cfg(n_particles=5, seed=27)
        x0 = initial_positions(cfg)
        dz = step_increments(cfg, 0)
        sig = LinearInteraction(SineKernel(1.0, 0.5))
        upd = x0 + sig.evaluate(x0, EmpiricalMeasure(x0)) * dz
        perm = np.array([3, 0, 4, 1, 2])
        upd_perm = x0[perm] + sig.evaluate(
            x0[perm], EmpiricalMeasure(x0[perm])) * dz[perm]
        assert np.allclose(upd[perm], upd_perm, atol=1e-14)

    def test_config_snaps_horizon_to_whole_steps(self):
        cfg = make_cfg(dt=0.3, horizon_T=1.0)
        assert cfg.n_steps == 3
        assert cfg.dt_effective == pytest.approx(1.0 / 3.0)

    def test_invalid_configs_rejected(self):
        with pytest.raises(ValueError):
            make_cfg(n_particles=0)
        with pytest.raises(ValueError):
            make_cfg(dt=-0.1)
        with pytest.raises(ValueError):
            make_cfg(sigma_mode="magic")
        with pytest.raises(ValueError):
            make_cfg(truncation_N=-2.0)


class TestPicard:
    def test_measure_independent_sigma_fixed_after_one_iteration(self):
        cfg = make_cfg(sigma=Constant(1.0), n_particles=500, seed=31)
        res = picard_flow(cfg, 3, common_increments=True)
        # iterate 2 replays iterate 1 exactly: the coefficient ignores the flow
        assert res.successive_gaps[1] == 0.0
        assert res.successive_gaps[2] == 0.0
        assert res.successive_gaps[0] > 0.0

    def test_contraction_for_short_horizon(self):
        cfg = make_cfg(n_particles=2000, dt=0.02, horizon_T=0.4, seed=32)
        res = picard_flow(cfg, 5, common_increments=True)
        gaps = res.successive_gaps
        for a, b in zip(gaps, gaps[1:]):
            assert b < 0.8 * a
        assert gaps[-1] < 1e-3 * gaps[0]

    def test_iterates_approach_direct_simulation(self):
        cfg = make_cfg(n_particles=4000, dt=0.02, horizon_T=0.4, seed=33)
        res = picard_flow(cfg, 6, common_increments=True)
        direct = simulate(cfg)
        worst = max(wasserstein2(a, b) for a, b in
                    zip(res.flows[-1].marginals, direct.marginals))
        assert worst < 0.05

    def test_independent_increments_mode_differs(self):
        cfg = make_cfg(n_particles=300, seed=34)
        common = picard_flow(cfg, 2, common_increments=True)
        indep = picard_flow(cfg, 2, common_increments=False)
        assert common.successive_gaps[1] < indep.successive_gaps[1]


class TestCoupling:
    def test_measure_independent_sigma_gaps_vanish(self):
        cfg = make_cfg(sigma=Constant(1.0), seed=41)
        ref = simulate(cfg)
        res = simulate_coupled(cfg, ref)
        assert np.all(res.sup_abs_gaps == 0.0)
        assert res.distance_bound_excess <= 1e-12

    def test_single_particle_gap_matches_two_manual_runs(self):
        cfg = make_cfg(n_particles=1, seed=42, sigma=SmoothedDensityPower(0.5, 0.5),
                       sigma_mode="exact")
        ref_cfg = make_cfg(n_particles=200, seed=43,
                           sigma=SmoothedDensityPower(0.5, 0.5))
        ref = simulate(ref_cfg)
        res = simulate_coupled(cfg, ref)
        # manual replay
        x_sys = x_cop = float(initial_positions(cfg)[0])
        sig = SmoothedDensityPower(0.5, 0.5)
        worst = 0.0
        for k in range(cfg.n_steps):
            dz = float(step_increments(cfg, k, n=1)[0])
            s_sys = float(sig.evaluate(x_sys, EmpiricalMeasure([x_sys])))
            marg = ref.marginal_at(k * cfg.dt_effective)
            s_cop = float(sig.evaluate(x_cop, marg))
            x_sys += s_sys * dz
            x_cop += s_cop * dz
            worst = max(worst, abs(x_sys - x_cop))
        assert res.sup_abs_gaps[0] == pytest.approx(worst, rel=1e-10)

    def test_distance_bound_holds_along_interacting_runs(self):
        cfg = make_cfg(n_particles=300, seed=44)
        ref = simulate(make_cfg(n_particles=3000, seed=45))
        res = simulate_coupled(cfg, ref)
        assert res.distance_bound_excess <= 1e-12
        assert np.all(res.sup_abs_gaps >= 0.0)


class TestChaosExperiment:
    def test_degenerate_for_measure_independent_sigma(self):
        cfg = make_cfg(sigma=Constant(1.0), n_particles=50, seed=51)
        table = chaos_rate_experiment(cfg, [10, 20, 40, 80], reps=3, n_ref=800)
        assert table.status == "degenerate: all-zero"
        assert table.fitted_slope is None
        assert all(r.mean_sq_gap == 0.0 for r in table.rows)

    def test_gaps_shrink_with_system_size(self):
        cfg = make_cfg(n_particles=50, dt=0.05, horizon_T=0.5, seed=52)
        table = chaos_rate_experiment(cfg, [25, 50, 100, 200], reps=8, n_ref=2000)
        rows = table.rows
        assert table.fitted_slope < -0.4
        for a, b in zip(rows, rows[1:]):
            assert b.mean_sq_gap <= a.mean_sq_gap + 2.0 * math.hypot(a.stderr, b.stderr)

    def test_threading_does_not_change_results(self):
        cfg1 = make_cfg(n_particles=20, dt=0.1, horizon_T=0.3, seed=53, threads=1)
        cfg4 = make_cfg(n_particles=20, dt=0.1, horizon_T=0.3, seed=53, threads=4)
        t1 = chaos_rate_experiment(cfg1, [10, 20, 40, 80], reps=4, n_ref=800)
        t4 = chaos_rate_experiment(cfg4, [10, 20, 40, 80], reps=4, n_ref=800)
        assert [r.mean_sq_gap for r in t1.rows] == [r.mean_sq_gap for r in t4.rows]

    def test_validation_of_arguments(self):
        cfg = make_cfg()
        with pytest.raises(ValueError):
            chaos_rate_experiment(cfg, [100, 50, 200, 400], reps=2)
        with pytest.raises(ValueError):
            chaos_rate_experiment(cfg, [50, 100], reps=2)
        with pytest.raises(ValueError):
            chaos_rate_experiment(cfg, [50, 100, 200, 400], reps=2, n_ref=1000)


class TestInitialLaws:
    def test_point_gaussian_uniform(self):
        rng = substream(61)
        assert np.all(PointMass(2.0).sample(5, rng) == 2.0)
        g = GaussianLaw(1.0, 0.5).sample(100_000, substream(62))
        assert abs(g.mean() - 1.0) < 0.01 and abs(g.std() - 0.5) < 0.01
        u = UniformLaw(-2.0, 3.0).sample(100_000, substream(63))
        assert u.min() >= -2.0 and u.max() <= 3.0

    def test_file_law_resamples_csv(self, tmp_path):
        path = tmp_path / "init.csv"
        EmpiricalMeasure([1.0, 2.0, 3.0]).to_csv(path)
        draws = FileLaw(str(path)).sample(1000, substream(64))
        assert set(np.unique(draws)) <= {1.0, 2.0, 3.0}


class TestExports:
    def test_flow_binary_roundtrip(self, tmp_path):
        flow = simulate(make_cfg(n_particles=17, seed=71))
        path = tmp_path / "flow.bin"
        flow_to_binary(flow, path)
        back = flow_from_binary(path)
        assert np.array_equal(back.times, flow.times)
        for a, b in zip(back.marginals, flow.marginals):
            assert np.array_equal(a.samples, b.samples)

    def test_flow_csv_layout(self, tmp_path):
        flow = simulate(make_cfg(n_particles=3, dt=0.25, horizon_T=0.5, seed=72))
        path = tmp_path / "flow.csv"
        flow_to_csv(flow, path)
        lines = path.read_text().strip().splitlines()
        assert lines[0] == "time,x1,x2,x3"
        assert len(lines) == 1 + flow.times.size

    def test_chaos_table_csv(self, tmp_path):
        table = ChaosRateTable(
            rows=[], fitted_slope=None, slope_stderr=None, status="degenerate",
            reference_n=0, reps=0)
        path = tmp_path / "t.csv"
        chaos_table_to_csv(table, path)
        assert path.read_text().startswith("n,mean_sq_gap,stderr")


class TestMarginalFlowContainer:
    def test_left_limit_lookup(self):
        times = np.array([0.0, 0.5, 1.0])
        marg = [EmpiricalMeasure([float(i)]) for i in range(3)]
        flow = MarginalFlow(times=times, marginals=marg)
        assert flow.marginal_at(0.0).samples[0] == 0.0
        assert flow.marginal_at(0.49).samples[0] == 0.0
        assert flow.marginal_at(0.5).samples[0] == 1.0
        assert flow.marginal_at(2.0).samples[0] == 2.0

    def test_validation(self):
        with pytest.raises(ValueError):
            MarginalFlow(times=np.array([0.0, 0.0]),
                         marginals=[EmpiricalMeasure([1.0])] * 2)
        with pytest.raises(ValueError):
            MarginalFlow(times=np.array([0.0, 1.0]),
                         marginals=[EmpiricalMeasure([1.0]),
                                    EmpiricalMeasure([1.0, 2.0])])
