import math
import warnings

import numpy as np
import pytest
from pydantic import ValidationError

from risopt.channel import rayleigh_channel_set
from risopt.errors import DimensionMismatch, RankDeficientWarning
from risopt.lipschitz import lipschitz_bound
from risopt.objective import LinkBudget, ParallelChannels, composite_channel, objective_f
from risopt.optimizer import (
    InitialPoint,
    OptimizerConfig,
    OptimizerState,
    jpr_mapg,
    jpr_pg,
    next_t,
    no_ris,
    prox_phase,
    prox_precoder,
    quantize_phases,
    quantized_rate,
    ris_only_baseline,
    run_algorithm,
    static_ris,
    svd_precoder,
)
from risopt.utils.seeding import make_rng

from .conftest import crandn


class TestProximalOperators:
    def test_precoder_projection(self):
        out = prox_precoder(np.array([[2.0, 0.0], [0.0, 2.0]], dtype=complex), 2)
        np.testing.assert_allclose(out, np.eye(2), atol=1e-15)

    def test_precoder_inside_ball_unchanged(self):
        x = 0.5 * np.eye(2, dtype=complex)
        np.testing.assert_array_equal(prox_precoder(x, 2), x)

    def test_precoder_is_idempotent(self, rng):
        once = prox_precoder(crandn(rng, 5, 3) * 4, 3)
        np.testing.assert_allclose(prox_precoder(once, 3), once, atol=1e-14)
        assert np.linalg.norm(once) ** 2 == pytest.approx(3.0)

    def test_phase_projection(self):
        np.testing.assert_allclose(prox_phase(np.array([3 + 4j])), [0.6 + 0.8j], atol=1e-15)

    def test_phase_projection_of_zero(self):
        np.testing.assert_array_equal(prox_phase(np.array([0.0 + 0.0j, 2.0j]), amplitude=0.5), [0.5, 0.5j])

    def test_phase_projection_is_idempotent(self, rng):
        once = prox_phase(crandn(rng, 2, 6), 0.9)
        np.testing.assert_allclose(prox_phase(once, 0.9), once, atol=1e-15)
        np.testing.assert_allclose(np.abs(once), 0.9)


class TestExtrapolationSequence:
    def test_values(self):
        t2 = next_t(1.0)
        assert t2 == pytest.approx(1.618034, abs=1e-6)
        assert next_t(t2) == pytest.approx(2.193527, abs=1e-6)

    def test_first_extrapolation_is_a_no_op(self, rng):
        init = InitialPoint(crandn(rng, 4, 2), np.exp(1j * rng.uniform(0, 6, (1, 3))))
        state = OptimizerState.start(init)
        state.extrapolate()
        np.testing.assert_array_equal(state.P, init.precoder)
        np.testing.assert_array_equal(state.y, init.phases)

    def test_advance(self):
        state = OptimizerState.start(InitialPoint(np.eye(2, dtype=complex), np.ones((1, 2), dtype=complex)))
        state.advance_t()
        assert (state.t_prev, state.t_cur) == (1.0, next_t(1.0))


class TestSvdPrecoder:
    def test_diagonal_channel(self):
        f = svd_precoder(np.diag([3.0, 1.0]).astype(complex), 1)
        assert abs(f[0, 0]) == pytest.approx(1.0)
        assert abs(f[1, 0]) == pytest.approx(0.0, abs=1e-15)

    def test_power(self, rng):
        f = svd_precoder(crandn(rng, 4, 6), 3)
        assert np.linalg.norm(f) ** 2 == pytest.approx(3.0)
        np.testing.assert_allclose(f.conj().T @ f, np.eye(3), atol=1e-12)

    def test_too_many_streams(self, rng):
        with pytest.raises(DimensionMismatch):
            svd_precoder(crandn(rng, 4, 2), 3)

    def test_rank_deficient_channel_warns(self):
        h = np.zeros((2, 3), dtype=complex)
        h[0, 0] = 1.0
        with pytest.warns(RankDeficientWarning):
            f = svd_precoder(h, 2)
        assert np.linalg.norm(f) ** 2 == pytest.approx(2.0)


class TestQuantization:
    def test_one_bit(self):
        pattern = quantize_phases(np.array([np.exp(0.6j * np.pi)]), 1)
        np.testing.assert_allclose(pattern.vectors, [-1.0], atol=1e-12)

    def test_two_bits(self):
        pattern = quantize_phases(np.array([np.exp(0.3j * np.pi)]), 2)
        np.testing.assert_allclose(pattern.vectors, [1j], atol=1e-12)

    def test_already_on_grid(self):
        grid = np.exp(1j * np.pi / 4 * np.arange(8))
        np.testing.assert_allclose(quantize_phases(grid, 3).vectors, grid, atol=1e-12)

    def test_keeps_amplitude(self, rng):
        phases = 0.7 * np.exp(1j * rng.uniform(-np.pi, np.pi, (2, 10)))
        pattern = quantize_phases(phases, 2, amplitude=0.7)
        np.testing.assert_allclose(np.abs(pattern.vectors), 0.7)
        assert pattern.vectors.shape == (2, 10)

    def test_ties_go_to_the_smaller_index(self):
        np.testing.assert_allclose(quantize_phases(np.array([1j]), 1).vectors, [1.0], atol=1e-12)
        np.testing.assert_allclose(quantize_phases(np.array([np.exp(0.25j * np.pi)]), 2).vectors, [1.0], atol=1e-12)

    def test_rejects_zero_bits(self):
        with pytest.raises(ValueError):
            quantize_phases(np.ones(2, dtype=complex), 0)


class TestConfig:
    def test_defaults(self):
        cfg = OptimizerConfig()
        assert (cfg.max_iterations, cfg.step_scale, cfg.stop_tol, cfg.quant_bits) == (500, 0.99, 1e-8, None)

    @pytest.mark.parametrize("field, value", [("step_scale", 1.0), ("step_scale", 0.0), ("max_iterations", 0)])
    def test_rejects_out_of_range(self, field, value):
        with pytest.raises(ValidationError):
            OptimizerConfig(**{field: value})


def desk_instance(seed, topology="parallel", n_panels=2):
    rng = make_rng(seed)
    ch = rayleigh_channel_set(rng, topology, n_tx=8, n_rx=4, n_ris=16, n_panels=n_panels)
    return ch, LinkBudget(rho=1.0, noise_power=1.0)


class TestJprMapg:
    @pytest.mark.parametrize("topology", ["parallel", "multihop"])
    def test_monotone_and_feasible(self, topology):
        ch, lb = desk_instance(11, topology)
        init = InitialPoint.static_mirror(ch, 2)
        report = jpr_mapg(ch, lb, OptimizerConfig(max_iterations=100, stop_tol=0.0), init)
        assert report.iterations == 100
        assert all(b <= a + 1e-9 for a, b in zip(report.objective, report.objective[1:]))
        assert np.linalg.norm(report.precoder) ** 2 <= 2 + 1e-9
        np.testing.assert_allclose(np.abs(report.phases), 1.0, atol=1e-12)
        assert report.final_rate >= report.initial_rate

    def test_selection_rule(self):
        ch, lb = desk_instance(12)
        report = jpr_mapg(ch, lb, OptimizerConfig(max_iterations=60, stop_tol=0.0), InitialPoint.static_mirror(ch, 2))
        assert len(report.candidates) == len(report.branches) == report.iterations
        for (f_w, f_u), branch, chosen in zip(report.candidates, report.branches, report.objective[1:]):
            assert chosen == min(f_w, f_u)
            assert branch == ("accelerated" if f_w <= f_u else "monitored")
        for before, monitored in zip(report.objective, report.monitor_objective):
            assert monitored <= before + 1e-9

    def test_descent_budget(self):
        ch, lb = desk_instance(13)
        report = jpr_mapg(ch, lb, OptimizerConfig(max_iterations=80, stop_tol=0.0), InitialPoint.static_mirror(ch, 2))
        spent, budget = report.descent_budget()
        assert spent <= budget * (1 + 1e-9) + 1e-12

    def test_step_size(self):
        ch, lb = desk_instance(14)
        big_l = lipschitz_bound(ch, lb, 2, 1.0).L
        report = jpr_mapg(ch, lb, OptimizerConfig(max_iterations=3), InitialPoint.static_mirror(ch, 2))
        assert report.lipschitz == pytest.approx(big_l)
        assert report.alpha == pytest.approx(0.99 / big_l)

    def test_first_iteration_records_initial_point(self):
        ch, lb = desk_instance(15)
        init = InitialPoint.static_mirror(ch, 2)
        report = jpr_mapg(ch, lb, OptimizerConfig(max_iterations=1), init)
        assert report.objective[0] == pytest.approx(objective_f(ch, init.phases, init.precoder, lb))

    def test_convergence_stop(self):
        ch, lb = desk_instance(16)
        report = jpr_mapg(ch, lb, OptimizerConfig(max_iterations=20000, stop_tol=1e-3), InitialPoint.static_mirror(ch, 2))
        assert report.status == "converged"
        assert report.iterations < 20000

    def test_zero_channel(self, unit_budget):
        zero = np.zeros((2, 3), dtype=complex)
        ch = ParallelChannels(zero, [(np.zeros((4, 3), dtype=complex), np.zeros((2, 4), dtype=complex))])
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RankDeficientWarning)
            report = jpr_mapg(ch, unit_budget, OptimizerConfig(max_iterations=5), InitialPoint.static_mirror(ch, 1))
        assert report.final_rate == 0.0
        assert report.lipschitz == 0.0
        assert math.isfinite(report.alpha)

    def test_deterministic(self):
        ch, lb = desk_instance(17)
        cfg = OptimizerConfig(max_iterations=30)
        a = jpr_mapg(ch, lb, cfg, InitialPoint.static_mirror(ch, 2))
        b = jpr_mapg(ch, lb, cfg, InitialPoint.static_mirror(ch, 2))
        assert a.objective == b.objective
        np.testing.assert_array_equal(a.phases, b.phases)


class TestBaselines:
    def test_pg_is_monotone(self):
        ch, lb = desk_instance(21)
        report = jpr_pg(ch, lb, OptimizerConfig(max_iterations=50, stop_tol=0.0), InitialPoint.static_mirror(ch, 2))
        assert all(b <= a + 1e-9 for a, b in zip(report.objective, report.objective[1:]))
        assert set(report.branches) == {"monitored"}

    def test_ris_only_keeps_precoder(self):
        ch, lb = desk_instance(22)
        init = InitialPoint.static_mirror(ch, 2)
        report = ris_only_baseline(ch, lb, OptimizerConfig(max_iterations=40, stop_tol=0.0), init)
        np.testing.assert_allclose(report.precoder, svd_precoder(composite_channel(ch, init.phases), 2))
        assert all(b <= a + 1e-9 for a, b in zip(report.objective, report.objective[1:]))
        assert set(report.residual_f) == {0.0}

    def test_static_ris_is_the_starting_point(self):
        ch, lb = desk_instance(23)
        init = InitialPoint.static_mirror(ch, 2)
        report = static_ris(ch, lb, 2)
        assert report.status == "closed_form"
        assert report.iterations == 0
        assert report.objective[0] == pytest.approx(objective_f(ch, init.phases, init.precoder, lb))

    def test_no_ris_ignores_panels(self):
        ch, lb = desk_instance(24)
        bare = ParallelChannels(ch.direct)
        assert no_ris(ch, lb, 2).final_rate == pytest.approx(no_ris(bare, lb, 2).final_rate)

    def test_jpr_mapg_improves_on_static_mirror(self):
        ch, lb = desk_instance(25)
        cfg = OptimizerConfig(max_iterations=200)
        optimized = run_algorithm("jpr_mapg", ch, lb, cfg, 2).final_rate
        assert optimized >= run_algorithm("static_ris", ch, lb, cfg, 2).final_rate - 1e-9

    def test_unknown_algorithm(self):
        ch, lb = desk_instance(26)
        with pytest.raises(ValueError):
            run_algorithm("gradient_ascent", ch, lb, OptimizerConfig(), 2)

    def test_static_ris_without_panels_is_no_ris(self):
        ch, lb = desk_instance(27)
        bare = ParallelChannels(ch.direct)
        assert static_ris(bare, lb, 2).final_rate == pytest.approx(no_ris(ch, lb, 2).final_rate, rel=1e-12)

    @pytest.mark.parametrize("topology", ["parallel", "multihop"])
    def test_pg_first_iterate_matches_mapg(self, topology):
        ch, lb = desk_instance(28, topology)
        init = InitialPoint.static_mirror(ch, 2)
        cfg = OptimizerConfig(max_iterations=1, stop_tol=0.0)
        accelerated, plain = jpr_mapg(ch, lb, cfg, init), jpr_pg(ch, lb, cfg, init)
        assert accelerated.objective == plain.objective
        np.testing.assert_array_equal(accelerated.precoder, plain.precoder)
        np.testing.assert_array_equal(accelerated.phases, plain.phases)


class TestQuantizedRate:
    def test_ten_bits_lose_at_most_a_thousandth(self):
        ch, lb = desk_instance(31)
        report = jpr_mapg(ch, lb, OptimizerConfig(max_iterations=100), InitialPoint.static_mirror(ch, 2))
        assert quantized_rate(ch, lb, report, 10) == pytest.approx(report.final_rate, rel=1e-3)

    def test_no_phases(self):
        ch, lb = desk_instance(32)
        report = no_ris(ch, lb, 2)
        assert quantized_rate(ch, lb, report, 1) == report.final_rate
