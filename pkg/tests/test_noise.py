"""Tests for coefficient-noise propagation and sampling models."""

import numpy as np
import pytest

from blocklanczos import noise
from blocklanczos.noise import (
    CostModel,
    CountingSampler,
    NoiseModel,
    SUMMARY_HEADER,
    SWEEP_HEADER,
    SyntheticBlockProblem,
    cost_sweep,
    fit_loglog_slope,
    fit_summary,
    load_sweep_csv,
    mae_sweep,
    oaa_cost,
    perturb_and_mae,
    perturb_coefficients,
    perturbed_assemblies,
    sample_expectation,
    sampled_energy_errors,
    slope_report,
    summarize_sweep,
    write_summary_csv,
    write_sweep_csv,
)

import reference_values as ref


class TestNoiseModel:
    def test_negative_eta_rejected(self):
        with pytest.raises(ValueError):
            NoiseModel(-1e-3, 0)

    def test_zero_eta_allowed(self):
        assert NoiseModel(0.0, 7).eta == 0.0


class TestSyntheticBlockProblem:
    def test_generate_shapes_and_ranges(self):
        problem = SyntheticBlockProblem.generate(3, 5, seed=0)
        assert len(problem.a_blocks) == 5
        assert len(problem.b_blocks) == 4
        assert problem.dimension == 15
        for a in problem.a_blocks:
            assert a.shape == (3, 3)
            assert np.max(np.abs(a - a.T)) == 0.0
            assert np.all((a >= 0.0) & (a <= 1.0))
        for b in problem.b_blocks:
            assert np.all((b >= 0.0) & (b <= 1.0))

    def test_generate_reproducible(self):
        one = SyntheticBlockProblem.generate(2, 4, seed=42)
        two = SyntheticBlockProblem.generate(2, 4, seed=42)
        for x, y in zip(one.a_blocks + one.b_blocks,
                        two.a_blocks + two.b_blocks):
            assert np.array_equal(x, y)

    def test_validation(self):
        eye = np.eye(2)
        with pytest.raises(ValueError):
            SyntheticBlockProblem(2, 2, (eye,), (eye,))
        with pytest.raises(ValueError):
            SyntheticBlockProblem(2, 1, (np.array([[0.0, 1.0], [0.0, 0.0]]),), ())
        with pytest.raises(ValueError):
            SyntheticBlockProblem(2, 1, (np.eye(3),), ())
        with pytest.raises(ValueError):
            SyntheticBlockProblem(0, 1, (), ())

    def test_scalar_case(self):
        problem = SyntheticBlockProblem.generate(1, 6, seed=3)
        assert problem.dimension == 6
        assert noise.clean_assembly(problem).shape == (6, 6)


class TestPerturbCoefficients:
    def test_zero_eta_bit_identical(self):
        problem = SyntheticBlockProblem.generate(2, 4, seed=1)
        a_noisy, b_noisy = perturb_coefficients(problem, NoiseModel(0.0, 99))
        assert a_noisy is problem.a_blocks
        assert b_noisy is problem.b_blocks

    def test_diagonal_noise_symmetrized(self):
        problem = SyntheticBlockProblem.generate(4, 3, seed=2)
        a_noisy, b_noisy = perturb_coefficients(problem, NoiseModel(1e-2, 5))
        for a in a_noisy:
            assert np.max(np.abs(a - a.T)) < 1e-15
        # coupling-noise is left general
        asym = [np.max(np.abs((b1 - b0) - (b1 - b0).T))
                for b0, b1 in zip(problem.b_blocks, b_noisy)]
        assert max(asym) > 0.0

    def test_seeded_determinism(self):
        problem = SyntheticBlockProblem.generate(2, 5, seed=3)
        first = perturb_coefficients(problem, NoiseModel(1e-3, 11))
        second = perturb_coefficients(problem, NoiseModel(1e-3, 11))
        for x, y in zip(first[0] + first[1], second[0] + second[1]):
            assert np.array_equal(x, y)
        other = perturb_coefficients(problem, NoiseModel(1e-3, 12))
        assert not np.array_equal(first[0][0], other[0][0])

    def test_noise_scale_tracks_eta(self):
        problem = SyntheticBlockProblem.generate(3, 10, seed=4)
        for eta in (1e-4, 1e-2):
            _, b_noisy = perturb_coefficients(problem, NoiseModel(eta, 6))
            deltas = np.concatenate([
                (b1 - b0).ravel() for b0, b1 in zip(problem.b_blocks, b_noisy)
            ])
            assert 0.5 * eta < np.std(deltas) < 2.0 * eta


class TestPerturbAndMae:
    def test_zero_eta_gives_exact_zero(self):
        problem = SyntheticBlockProblem.generate(4, 6, seed=5)
        assert perturb_and_mae(problem, NoiseModel(0.0, 0)) == 0.0

    def test_deterministic(self):
        problem = SyntheticBlockProblem.generate(2, 6, seed=6)
        model = NoiseModel(1e-3, 13)
        assert perturb_and_mae(problem, model) == perturb_and_mae(problem, model)

    def test_matches_sorted_pairing_reimplementation(self):
        problem = SyntheticBlockProblem.generate(3, 4, seed=7)
        model = NoiseModel(1e-2, 14)
        clean, noisy = perturbed_assemblies(problem, model)
        expected = np.mean(np.abs(
            np.linalg.eigvalsh(noisy) - np.linalg.eigvalsh(clean)
        ))
        assert perturb_and_mae(problem, model) == pytest.approx(expected,
                                                                rel=1e-15)

    @pytest.mark.parametrize("seed", [0, 1, 2, 3, 4])
    def test_weyl_bound(self, seed):
        # Sorted-pair eigenvalue error never exceeds the spectral norm of
        # the Hermitian perturbation.
        problem = SyntheticBlockProblem.generate(3, 5, seed=seed)
        model = NoiseModel(1e-2, seed + 100)
        clean, noisy = perturbed_assemblies(problem, model)
        mae = perturb_and_mae(problem, model)
        assert mae <= np.linalg.norm(noisy - clean, 2) + 1e-15


class TestCountingSampler:
    def test_validation(self):
        with pytest.raises(ValueError):
            CountingSampler(1.5, 100, 0)
        with pytest.raises(ValueError):
            CountingSampler(-0.1, 100, 0)
        with pytest.raises(ValueError):
            CountingSampler(0.5, 0, 0)

    def test_certain_events(self):
        assert sample_expectation(CountingSampler(1.0, 17, 0)) == 1.0
        assert sample_expectation(CountingSampler(0.0, 17, 0)) == 0.0

    def test_estimate_in_unit_interval_and_deterministic(self):
        sampler = CountingSampler(0.37, 1000, 21)
        est = sample_expectation(sampler)
        assert 0.0 <= est <= 1.0
        assert est == sample_expectation(CountingSampler(0.37, 1000, 21))

    def test_million_shot_tail(self):
        # 4-sigma window at p = 1/2: every one of 200 fixed seeds lands
        # within 0.002 (worst observed 1.83e-3).
        worst = max(
            abs(sample_expectation(CountingSampler(0.5, 10**6, s)) - 0.5)
            for s in range(200)
        )
        assert worst < 0.002

    def test_unbiased_across_seeds(self):
        estimates = [
            sample_expectation(CountingSampler(0.3, 100, s))
            for s in range(10_000)
        ]
        standard_error = np.sqrt(0.3 * 0.7 / (100 * 10_000))
        assert abs(np.mean(estimates) - 0.3) < 3.0 * standard_error


class TestCostModel:
    def test_group_bounds(self):
        with pytest.raises(ValueError):
            CostModel(4, 0)
        with pytest.raises(ValueError):
            CostModel(4, 5)

    def test_single_group_value(self):
        assert oaa_cost(CostModel(4, 1)) == 4.0

    def test_whole_register_value(self):
        assert oaa_cost(CostModel(4, 4)) == 4.0 * 2.0 ** 0.5

    def test_q40_sweep_minimizer(self):
        sweep = cost_sweep(40)
        assert len(sweep) == 40
        best_group, best_cost = min(sweep, key=lambda item: item[1])
        assert best_group == ref.Q40_BEST_GROUP
        assert best_cost == pytest.approx(ref.Q40_BEST_COST, rel=1e-14)
        assert 1 < best_group < 40


class TestSweep:
    def test_row_grid(self):
        rows = mae_sweep(2, [3, 4], [0.0, 1e-3], trials=2, base_seed=1)
        assert len(rows) == 2 * 2 * 2
        assert {row.block_count for row in rows} == {3, 4}
        zero_rows = [row for row in rows if row.eta == 0.0]
        assert all(row.mae == 0.0 for row in zero_rows)

    def test_csv_round_trip(self, tmp_path):
        rows = mae_sweep(2, [3], [1e-4, 1e-3], trials=2, base_seed=2)
        path = tmp_path / "sweep.csv"
        write_sweep_csv(rows, path)
        assert path.read_text().splitlines()[0] == ",".join(SWEEP_HEADER)
        assert load_sweep_csv(path) == rows

    def test_summary_means(self, tmp_path):
        rows = mae_sweep(1, [4], [1e-3], trials=3, base_seed=3)
        summary = summarize_sweep(rows)
        assert len(summary) == 1
        assert summary[0].mean_mae == pytest.approx(
            np.mean([row.mae for row in rows]), rel=1e-15
        )
        path = tmp_path / "summary.csv"
        write_summary_csv(summary, path)
        assert path.read_text().splitlines()[0] == ",".join(SUMMARY_HEADER)

    def test_sweep_deterministic(self):
        one = mae_sweep(2, [3], [1e-3], trials=2, base_seed=5)
        two = mae_sweep(2, [3], [1e-3], trials=2, base_seed=5)
        assert one == two


class TestFit:
    def test_exact_power_law(self):
        etas = np.array([1e-5, 1e-4, 1e-3, 1e-2])
        fit = fit_loglog_slope(etas, 3.7 * etas)
        assert fit.slope == pytest.approx(1.0, abs=1e-12)
        assert fit.intercept == pytest.approx(np.log10(3.7), abs=1e-12)
        assert fit.r_squared == pytest.approx(1.0, abs=1e-12)

    def test_zero_eta_points_excluded(self):
        etas = np.array([0.0, 1e-4, 1e-3, 1e-2])
        maes = np.array([0.0, 2e-4, 2e-3, 2e-2])
        assert fit_loglog_slope(etas, maes).slope == pytest.approx(1.0,
                                                                   abs=1e-12)

    def test_errors(self):
        with pytest.raises(ValueError):
            fit_loglog_slope(np.array([0.0, 1e-3]), np.array([0.0, 1e-3]))
        with pytest.raises(ValueError):
            fit_loglog_slope(np.array([1e-4, 1e-3]), np.array([0.0, 1e-3]))

    def test_fit_summary_and_report(self):
        rows = mae_sweep(2, [3, 5], [1e-4, 1e-3, 1e-2], trials=8, base_seed=6)
        fits = fit_summary(summarize_sweep(rows))
        assert set(fits) == {(2, 3), (2, 5)}
        for fit in fits.values():
            assert 0.8 < fit.slope < 1.2
        report = slope_report(fits)
        lines = report.splitlines()
        assert lines[0].startswith("block_size block_count slope")
        assert len(lines) == 3


class TestSampledEnergyErrors:
    def test_error_decreases_with_shots(self):
        results = sampled_energy_errors([10**2, 10**4, 10**6], trials=8)
        errors = [err for _, err in results]
        assert errors[0] > errors[1] > errors[2]

    def test_slope_near_inverse_square_root(self):
        results = sampled_energy_errors([10**3, 10**4, 10**5, 10**6],
                                        trials=16)
        slope = np.polyfit(np.log10([s for s, _ in results]),
                           np.log10([e for _, e in results]), 1)[0]
        assert slope == pytest.approx(ref.SHOT_ERROR_SLOPE, abs=2e-3)
        assert -0.65 < slope < -0.35

    def test_deterministic(self):
        assert sampled_energy_errors([1000], trials=4) == sampled_energy_errors(
            [1000], trials=4
        )
