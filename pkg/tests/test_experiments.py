"""Tests for truncated-sample generation and the Monte Carlo harness."""

import logging
import math

import numpy as np
import pytest

from config import GENERATION_CONFIG
from errors import ConfigError, DegenerateThresholdError, GenerationStallError, TheoryDomainError
from estimators import evi_lynden_bell, lynden_bell_cdf, random_threshold, weissman_quantile
from experiments import (
    CurveCell,
    CurveResult,
    ExperimentSpec,
    draw_truncated,
    generate_truncated,
    lynden_bell_statistic,
    replicate_rng,
    run_bias_rmse,
    run_clt_check,
    run_consistency_sweep,
    run_quantile_curve,
    run_sup_deviation_check,
    simulate_quantile_errors,
    simulate_replicates,
    sup_deviation,
)
from models import Burr, Pareto
from theory import rate_bridge

NO_TRUNCATION = Pareto(1.0, 1e12)


def _constant_quarter(sample, k):
    return 0.25


def _fails_at_small_k(sample, k):
    if k < 20:
        raise DegenerateThresholdError("forced failure", degenerate_point=1.0)
    return 0.25


def _fails_on_large_maximum(sample, k):
    if sample.sorted_x[-1] > 6.0:
        raise DegenerateThresholdError("forced failure")
    return float(sample.sorted_x[-1])


def _not_a_toolkit_error(sample, k):
    raise RuntimeError("bug")


def _oracle_weissman(sample, k, p_n):
    return weissman_quantile(random_threshold(sample, k), k / sample.n, p_n, 0.25)


class _BatchRecorder:
    """Forwards sampling to a model and remembers every requested batch size."""

    def __init__(self, model):
        self.model = model
        self.literal = model.literal
        self.sizes = []

    def sample(self, rng, size):
        self.sizes.append(size)
        return self.model.sample(rng, size)


class TestReplicateStreams:
    def test_same_index_same_stream(self):
        np.testing.assert_array_equal(replicate_rng(7, 3).random(5), replicate_rng(7, 3).random(5))

    def test_streams_differ_by_index_and_seed(self):
        base = replicate_rng(7, 3).random(5)
        assert not np.array_equal(base, replicate_rng(7, 4).random(5))
        assert not np.array_equal(base, replicate_rng(8, 3).random(5))


class TestGenerateTruncated:
    def test_every_pair_observed(self, burr_pair):
        sample = generate_truncated(*burr_pair, 500, np.random.default_rng(1))
        assert sample.n == 500
        assert np.all(sample.x_star <= sample.y_star)

    def test_single_pair(self, burr_pair):
        sample = generate_truncated(*burr_pair, 1, np.random.default_rng(2))
        assert sample.n == 1
        assert sample.x_star[0] <= sample.y_star[0]

    def test_no_truncation_gives_plain_draws(self):
        model_x = Burr(10, 4, 1)
        sample = generate_truncated(model_x, NO_TRUNCATION, 50, np.random.default_rng(3))
        expected = model_x.sample(np.random.default_rng(3), 64)[:50]
        np.testing.assert_array_equal(sample.x_star, expected)

    def test_acceptance_rate(self, pareto_pair):
        sample, attempts = draw_truncated(*pareto_pair, 100_000, np.random.default_rng(4))
        assert sample.n / attempts == pytest.approx(2.0 / 3.0, abs=0.01)

    def test_deterministic(self, burr_pair):
        first = generate_truncated(*burr_pair, 300, replicate_rng(5, 0))
        second = generate_truncated(*burr_pair, 300, replicate_rng(5, 0))
        np.testing.assert_array_equal(first.x_star, second.x_star)
        np.testing.assert_array_equal(first.y_star, second.y_star)

    def test_batches_are_capped(self, pareto_pair, monkeypatch):
        monkeypatch.setitem(GENERATION_CONFIG, "max_batch", 100)
        model_x, model_y = _BatchRecorder(pareto_pair[0]), _BatchRecorder(pareto_pair[1])
        sample, attempts = draw_truncated(model_x, model_y, 2000, np.random.default_rng(6))
        assert sample.n == 2000
        assert max(model_x.sizes) <= 100
        assert model_x.sizes == model_y.sizes
        assert attempts <= sum(model_x.sizes)

    def test_stall(self):
        with pytest.raises(GenerationStallError):
            generate_truncated(Pareto(0.5, 1e6), Burr(10, 4, 1), 100_000, np.random.default_rng(6))

    def test_rejects_nonpositive_n(self, burr_pair):
        with pytest.raises(ConfigError):
            generate_truncated(*burr_pair, 0, np.random.default_rng(0))


class TestExperimentSpec:
    def test_default_grid(self, burr_pair):
        spec = ExperimentSpec(*burr_pair, n=200, replicates=10)
        assert spec.k_grid == tuple(range(10, 151, 5))

    def test_default_grid_small_n(self, burr_pair):
        assert ExperimentSpec(*burr_pair, n=5, replicates=10).k_grid == (1, 2, 3, 4)

    @pytest.mark.parametrize("grid", [(10, 10), (20, 10), (0, 5), (5, 200)])
    def test_rejects_bad_grid(self, burr_pair, grid):
        with pytest.raises(ConfigError) as info:
            ExperimentSpec(*burr_pair, n=200, replicates=10, k_grid=grid)
        assert info.value.key == "k_grid"

    def test_rejects_bad_sizes(self, burr_pair):
        with pytest.raises(ConfigError):
            ExperimentSpec(*burr_pair, n=1, replicates=10)
        with pytest.raises(ConfigError):
            ExperimentSpec(*burr_pair, n=200, replicates=0)
        with pytest.raises(ConfigError):
            ExperimentSpec(*burr_pair, n=200, replicates=10, p_n=1.5)

    def test_warns_when_indices_disordered(self, burr_pair, caplog):
        model_x, model_y = burr_pair
        with caplog.at_level(logging.WARNING):
            ExperimentSpec(model_y, model_x, n=200, replicates=10)
        assert any("gamma1 < gamma2" in record.getMessage() for record in caplog.records)


class TestHarness:
    def test_true_value_injection(self, burr_pair):
        spec = ExperimentSpec(*burr_pair, n=100, replicates=20, k_grid=(10, 30, 50), seed=1)
        result = run_bias_rmse(spec, estimators={"lynden_bell_hill": _constant_quarter})
        assert len(result.cells) == 3
        for cell in result.cells:
            assert cell.bias == 0.0
            assert cell.rmse == 0.0
            assert cell.variance == 0.0
            assert cell.failures == 0

    def test_default_estimators_rows(self, burr_pair):
        spec = ExperimentSpec(*burr_pair, n=200, replicates=20, k_grid=(20, 50), seed=2)
        result = run_bias_rmse(spec)
        assert [(c.k, c.estimator) for c in result.cells] == [
            (20, "gardes_stupfler"), (20, "lynden_bell_hill"), (50, "gardes_stupfler"), (50, "lynden_bell_hill"),
        ]

    def test_moment_identity(self, burr_pair):
        spec = ExperimentSpec(*burr_pair, n=200, replicates=50, k_grid=(10, 40, 90), seed=3)
        for cell in run_bias_rmse(spec).cells:
            assert cell.rmse ** 2 == pytest.approx(cell.bias ** 2 + cell.variance, abs=1e-10)
            assert cell.failures + cell.successes == cell.replicates

    def test_failures_are_counted_not_imputed(self, burr_pair):
        spec = ExperimentSpec(*burr_pair, n=100, replicates=30, k_grid=(10, 30), seed=4)
        result = run_bias_rmse(spec, estimators={"stub": _fails_at_small_k})
        missing = result.cell(10, "stub")
        assert missing.failures == 30
        assert missing.missing
        assert missing.mean is None and missing.rmse is None
        assert result.cell(30, "stub").failures == 0

    def test_partial_failures(self, burr_pair):
        spec = ExperimentSpec(*burr_pair, n=100, replicates=60, k_grid=(10,), seed=5)
        matrix = simulate_replicates(spec, {"stub": _fails_on_large_maximum})
        column = matrix.column(10, "stub")
        cell = matrix.summarize(0.0).cell(10, "stub")
        assert cell.failures == int(np.sum(np.isnan(column)))
        assert cell.mean == pytest.approx(float(np.nanmean(column)))

    def test_unexpected_errors_propagate(self, burr_pair):
        spec = ExperimentSpec(*burr_pair, n=50, replicates=2, k_grid=(5,), seed=6)
        with pytest.raises(RuntimeError):
            run_bias_rmse(spec, estimators={"stub": _not_a_toolkit_error})

    def test_raw_matrix_shape(self, burr_pair):
        spec = ExperimentSpec(*burr_pair, n=100, replicates=7, k_grid=(10, 20, 30), seed=7)
        matrix = simulate_replicates(spec, {"a": lynden_bell_statistic, "b": _constant_quarter})
        assert matrix.values.shape == (7, 3, 2)
        assert matrix.estimators == ("a", "b")
        np.testing.assert_array_equal(matrix.column(20, "b"), np.full(7, 0.25))

    def test_replicate_values_match_direct_evaluation(self, burr_pair):
        spec = ExperimentSpec(*burr_pair, n=150, replicates=4, k_grid=(25,), seed=8)
        matrix = simulate_replicates(spec, {"lynden_bell_hill": lynden_bell_statistic})
        for replicate in range(4):
            sample = generate_truncated(*burr_pair, 150, replicate_rng(8, replicate))
            try:
                expected = evi_lynden_bell(sample, 25).value
            except DegenerateThresholdError:
                assert math.isnan(matrix.values[replicate, 0, 0])
            else:
                assert matrix.values[replicate, 0, 0] == expected

    def test_deterministic_across_runs_and_workers(self, burr_pair):
        spec = ExperimentSpec(*burr_pair, n=200, replicates=120, k_grid=(20, 60), seed=9)
        sequential = run_bias_rmse(spec, workers=1)
        assert run_bias_rmse(spec, workers=1) == sequential
        assert run_bias_rmse(spec, workers=2) == sequential

    def test_mean_rmse(self):
        result = CurveResult(
            cells=(
                CurveCell(10, "a", 5, 0, 1.0, 0.1, 0.0, 0.1),
                CurveCell(20, "a", 5, 0, 1.0, 0.3, 0.0, 0.3),
                CurveCell(30, "a", 5, 5, None, None, None, None),
            )
        )
        assert result.mean_rmse("a", 10, 30) == pytest.approx(0.2)
        assert math.isnan(result.mean_rmse("b", 10, 30))


class TestQuantileCurve:
    def test_requires_pn(self, burr_pair):
        spec = ExperimentSpec(*burr_pair, n=200, replicates=5)
        with pytest.raises(ConfigError):
            run_quantile_curve(spec)

    def test_oracle_estimator_is_nearly_unbiased_on_power_tails(self):
        spec = ExperimentSpec(Pareto(0.25), NO_TRUNCATION, n=2000, replicates=200, k_grid=(200,), p_n=0.01, seed=10)
        cell = run_quantile_curve(spec, quantile_estimator=_oracle_weissman).cell(200, "lynden_bell_hill")
        assert cell.failures == 0
        assert abs(cell.bias) < 0.05

    def test_extrapolation_failures_counted(self, burr_pair):
        spec = ExperimentSpec(*burr_pair, n=200, replicates=20, k_grid=(10, 100), p_n=0.4, seed=11)
        result = run_quantile_curve(spec)
        assert result.cell(10, "lynden_bell_hill").failures == 20


class TestCltCheck:
    def test_single_replicate_flags_variance(self, pareto_pair):
        report = run_clt_check(*pareto_pair, n=500, k=20, replicates=1, seed=12)
        assert report.replicates == 1
        assert not report.variance_defined
        assert report.variance_ratio is None
        assert report.ks_statistic is None
        assert not report.within_bands()

    def test_scale_and_s2(self, pareto_pair):
        report = run_clt_check(*pareto_pair, n=500, k=20, replicates=5, seed=13)
        assert report.s2 == pytest.approx(5.0 / 12.0, rel=1e-7)
        assert report.scale == pytest.approx(math.sqrt(20.0), rel=1e-7)
        assert set(report.as_report()) >= {"variance_ratio", "ks_statistic", "failures"}

    def test_requires_ordered_indices(self, pareto_pair):
        model_x, model_y = pareto_pair
        with pytest.raises(TheoryDomainError):
            run_clt_check(model_y, model_x, n=500, k=20, replicates=5, seed=14)


class TestSupDeviation:
    def test_matches_dense_evaluation(self, burr_pair):
        model_x = burr_pair[0]
        sample = generate_truncated(*burr_pair, 300, np.random.default_rng(15))
        t = float(model_x.quantile(0.8))
        above = sample.sorted_x[sample.sorted_x > t]
        grid = np.concatenate([[np.nextafter(t, np.inf)], above, np.nextafter(above, -np.inf)])
        dense = max(abs(lynden_bell_cdf(sample, x) - model_x.cdf(x)) for x in grid)
        assert sup_deviation(sample, model_x, t) == pytest.approx(dense, abs=1e-12)

    def test_above_all_points(self, hand_sample):
        model = Pareto(0.5)
        assert sup_deviation(hand_sample, model, 5.0) == pytest.approx(1.0 - model.cdf(5.0))


@pytest.mark.slow
class TestAcceptance:
    def test_lynden_bell_beats_baseline_and_mild_truncation_helps(self, burr_pair, mild_burr_pair):
        grid = tuple(range(20, 101, 5))
        strong = run_bias_rmse(ExperimentSpec(*burr_pair, n=200, replicates=2000, k_grid=grid, seed=20160817))
        mild = run_bias_rmse(ExperimentSpec(*mild_burr_pair, n=200, replicates=2000, k_grid=grid, seed=20160817))
        assert strong.mean_rmse("lynden_bell_hill", 20, 100) < strong.mean_rmse("gardes_stupfler", 20, 100)
        for estimator in ("lynden_bell_hill", "gardes_stupfler"):
            assert mild.mean_rmse(estimator, 20, 100) < strong.mean_rmse(estimator, 20, 100)

    def test_clt_variance_and_shape(self):
        # gamma1 / gamma2 = 1/8, well inside the range where the third log-moment is finite
        model_x, model_y = Pareto(0.25, 1.0), Pareto(2.0, 1.0)
        bridge_n, bridge_k = 5000, 100
        assert rate_bridge(model_x, model_y, bridge_n, bridge_k).relative_error < 0.01
        report = run_clt_check(model_x, model_y, n=bridge_n, k=bridge_k, replicates=1000, seed=1)
        assert 0.75 <= report.variance_ratio <= 1.25
        assert report.ks_statistic <= 0.06
        assert report.within_bands()

    def test_clt_boundary_pair_is_reported(self, pareto_pair):
        # gamma1 / gamma2 = 1/2: the statistic converges too slowly for the bands at this n
        report = run_clt_check(*pareto_pair, n=5000, k=100, replicates=1000, seed=1)
        assert report.variance_defined
        assert report.variance_ratio > 0.0
        assert 0.0 < report.ks_statistic < 1.0

    def test_clt_without_truncation_is_hill_variance(self):
        spec = ExperimentSpec(Pareto(0.25), NO_TRUNCATION, n=5000, replicates=1000, k_grid=(100,), seed=2)
        matrix = simulate_replicates(spec, {"lynden_bell_hill": lynden_bell_statistic})
        z = math.sqrt(100) * (matrix.successes(100, "lynden_bell_hill") - 0.25)
        assert float(np.var(z, ddof=1)) / 0.0625 == pytest.approx(1.0, abs=0.25)

    def test_quantile_median_near_truth_under_mild_truncation(self, mild_burr_pair):
        spec = ExperimentSpec(*mild_burr_pair, n=200, replicates=2000, p_n=0.03, seed=20160817)
        matrix = simulate_quantile_errors(spec)
        medians = [1.0 + matrix.median(k, "lynden_bell_hill") for k in spec.k_grid]
        assert any(0.75 <= m <= 1.25 for m in medians if not math.isnan(m))

    def test_sup_deviation_does_not_explode(self, burr_pair):
        small = run_sup_deviation_check(*burr_pair, n=500, replicates=200, seed=3)
        large = run_sup_deviation_check(*burr_pair, n=2000, replicates=200, seed=3)
        assert large.median <= 2.0 * small.median

    def test_consistency_sweep(self, burr_pair):
        sweep = run_consistency_sweep(*burr_pair, sizes=(200, 800, 3200), fraction=0.25, replicates=300, seed=4)
        truth = 0.25
        sizes = sorted(sweep)
        for smaller, larger in zip(sizes, sizes[1:]):
            a, b = sweep[smaller], sweep[larger]
            ka, kb = a.k_grid[0], b.k_grid[0]
            rmse_a = a.summarize(truth).cell(ka, "lynden_bell_hill").rmse
            rmse_b = b.summarize(truth).cell(kb, "lynden_bell_hill").rmse
            band = 2.0 * math.hypot(
                a.rmse_standard_error(ka, "lynden_bell_hill", truth),
                b.rmse_standard_error(kb, "lynden_bell_hill", truth),
            )
            assert rmse_b <= rmse_a + band
            bias_a = abs(a.summarize(truth).cell(ka, "lynden_bell_hill").bias)
            bias_b = abs(b.summarize(truth).cell(kb, "lynden_bell_hill").bias)
            bias_band = 2.0 * math.hypot(
                a.bias_standard_error(ka, "lynden_bell_hill"), b.bias_standard_error(kb, "lynden_bell_hill")
            )
            assert bias_b <= bias_a + bias_band
