"""
Monte Carlo Harness for Truncated Tail Estimation.

This module generates randomly right-truncated samples by rejection and
runs the replicate studies used to assess the estimators:

    run_bias_rmse          bias/RMSE/variance curves against k for the
                           Lynden-Bell estimator and the two-Hill baseline
    run_quantile_curve     the same curves for the relative error x_hat/x_pn - 1
    run_clt_check          normalized estimates against the limit N(., s^2)
    run_sup_deviation_check  sqrt(n) sup_{x>t} |F_n - F| over replicates
    run_consistency_sweep  replicate matrices along growing n at fixed k/n

Replicate r always draws from the stream SeedSequence(seed, spawn_key=(r,)),
and results are aggregated by replicate index, so a run is bit-identical
whether replicates are executed sequentially or across worker processes.

Replicates on which an estimator raises one of the typed degeneracy errors
are counted as failures and excluded from the moments; nothing is imputed.
"""

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import partial
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy import stats

from config import CLT_CONFIG, CSV_CONFIG, GENERATION_CONFIG, SIMULATION_CONFIG, get_default_k_grid
from errors import ConfigError, GenerationStallError, TailEstimationError
from estimators import (
    EstimatorKind,
    ObservedSample,
    evi_gardes_stupfler,
    evi_lynden_bell,
    quantile_weissman,
)
from logging_utils import LoggingContext, get_logger
from models import HeavyTailModel
from theory import alpha, nontruncation_prob, variance

logger = get_logger(__name__)

Statistic = Callable[[ObservedSample, int], float]
QuantileEstimator = Callable[[ObservedSample, int, float], float]


def replicate_rng(seed: int, replicate: int) -> np.random.Generator:
    """Return the independent random stream of replicate ``replicate``."""
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=(int(replicate),)))


def draw_truncated(
    model_x: HeavyTailModel, model_y: HeavyTailModel, n: int, rng: np.random.Generator
) -> Tuple[ObservedSample, int]:
    """
    Draw an observed sample of exactly n pairs by rejection, counting the attempts.

    Independent (X, Y) pairs are drawn in batches and only those with X <= Y
    are kept, in draw order, until n have been accepted.

    Args:
        model_x: Law of the truncated variable X
        model_y: Law of the truncating variable Y
        n: Number of observed pairs (>= 1)
        rng: Random stream

    Returns:
        The observed sample and the number of (X, Y) draws up to and including
        the n-th accepted one, so n / attempts estimates P(X <= Y)

    Raises:
        GenerationStallError: If the draw budget max(10^6, 1000 n / p_hat) is exhausted
    """
    if int(n) < 1:
        raise ConfigError(f"sample size must be >= 1, got {n}", key="n")
    n = int(n)
    min_budget = int(GENERATION_CONFIG["min_draw_budget"])
    budget_factor = float(GENERATION_CONFIG["budget_factor"])
    overdraw = float(GENERATION_CONFIG["overdraw_factor"])
    min_batch = int(GENERATION_CONFIG["min_batch"])
    max_batch = int(GENERATION_CONFIG["max_batch"])

    kept_x: List[np.ndarray] = []
    kept_y: List[np.ndarray] = []
    kept = 0
    drawn = 0
    attempts = 0
    budget = float(min_budget)
    while kept < n:
        rate = kept / drawn if kept > 0 else 0.0
        if rate > 0:
            budget = max(float(min_budget), budget_factor * n / rate)
        if drawn >= budget:
            raise GenerationStallError(
                f"accepted only {kept} of {n} pairs after {drawn} draws "
                f"({model_x.literal} truncated by {model_y.literal})"
            )
        missing = n - kept
        batch = math.ceil(missing * overdraw / rate) if rate > 0 else max(missing, min_batch)
        batch = int(min(max(batch, min_batch), max_batch, budget - drawn))
        batch = max(batch, 1)

        x = model_x.sample(rng, batch)
        y = model_y.sample(rng, batch)
        accepted = np.flatnonzero(x <= y)[:missing]
        kept_x.append(x[accepted])
        kept_y.append(y[accepted])
        kept += accepted.size
        attempts = drawn + (int(accepted[-1]) + 1 if kept == n else batch)
        drawn += batch

    logger.debug("generated %d pairs from %d attempts (%d drawn)", n, attempts, drawn)
    return ObservedSample(np.concatenate(kept_x), np.concatenate(kept_y)), attempts


def generate_truncated(
    model_x: HeavyTailModel, model_y: HeavyTailModel, n: int, rng: np.random.Generator
) -> ObservedSample:
    """
    Draw an observed sample of exactly n pairs by rejection.

    Independent (X, Y) pairs are drawn and only those with X <= Y are kept,
    in draw order, until n have been accepted; see draw_truncated.
    """
    return draw_truncated(model_x, model_y, n, rng)[0]


@dataclass(frozen=True)
class ExperimentSpec:
    """
    Description of a Monte Carlo experiment.

    Attributes:
        model_x: Law of the truncated variable
        model_y: Law of the truncating variable
        n: Observed sample size (conditional on N = n)
        replicates: Number of replicated samples
        k_grid: Strictly increasing exceedance counts in [1, n-1]
        p_n: Tail probability for quantile experiments
        seed: Base seed of the per-replicate streams
    """

    model_x: HeavyTailModel
    model_y: HeavyTailModel
    n: int
    replicates: int
    k_grid: Tuple[int, ...] = field(default=())
    p_n: Optional[float] = None
    seed: int = int(SIMULATION_CONFIG["seed"])

    def __post_init__(self) -> None:
        if int(self.n) < 2:
            raise ConfigError(f"n must be >= 2, got {self.n}", key="n")
        if int(self.replicates) < 1:
            raise ConfigError(f"replicates must be >= 1, got {self.replicates}", key="replicates")
        if int(self.seed) < 0:
            raise ConfigError(f"seed must be a nonnegative integer, got {self.seed}", key="seed")
        grid = tuple(int(k) for k in self.k_grid) if self.k_grid else tuple(get_default_k_grid(int(self.n)))
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise ConfigError(f"k_grid must be strictly increasing, got {list(grid)}", key="k_grid")
        if grid[0] < 1 or grid[-1] > int(self.n) - 1:
            raise ConfigError(f"k_grid must lie within [1, {int(self.n) - 1}], got {list(grid)}", key="k_grid")
        if self.p_n is not None and not 0 < self.p_n < 1:
            raise ConfigError(f"p_n must lie in (0, 1), got {self.p_n}", key="pn")
        object.__setattr__(self, "k_grid", grid)
        if self.model_x.evi() >= self.model_y.evi():
            logger.warning(
                "extreme value index of %s (%.4g) is not below that of %s (%.4g); "
                "the asymptotic theory requires gamma1 < gamma2",
                self.model_x.literal, self.model_x.evi(), self.model_y.literal, self.model_y.evi(),
            )


@dataclass(frozen=True)
class CurveCell:
    """Aggregated statistics of one (k, estimator) cell; moments are None when every replicate failed."""

    k: int
    estimator: str
    replicates: int
    failures: int
    mean: Optional[float]
    bias: Optional[float]
    variance: Optional[float]
    rmse: Optional[float]

    @property
    def successes(self) -> int:
        return self.replicates - self.failures

    @property
    def missing(self) -> bool:
        return self.mean is None


@dataclass(frozen=True)
class CurveResult:
    """
    Per-(k, estimator) bias, RMSE, mean and variance of a replicate study.

    Cells are ordered by k ascending, then estimator name ascending.
    """

    cells: Tuple[CurveCell, ...]

    def cell(self, k: int, estimator: str) -> CurveCell:
        for cell in self.cells:
            if cell.k == k and cell.estimator == estimator:
                return cell
        raise KeyError((k, estimator))

    def estimators(self) -> List[str]:
        return sorted({cell.estimator for cell in self.cells})

    def k_values(self) -> List[int]:
        return sorted({cell.k for cell in self.cells})

    def curve(self, estimator: str, statistic: str) -> Tuple[List[int], List[Optional[float]]]:
        """Return (k values, statistic values) of one estimator."""
        chosen = [cell for cell in self.cells if cell.estimator == estimator]
        return [cell.k for cell in chosen], [getattr(cell, statistic) for cell in chosen]

    def mean_rmse(self, estimator: str, k_min: int, k_max: int) -> float:
        """Average RMSE of an estimator over the non-missing cells with k_min <= k <= k_max."""
        values = [
            cell.rmse for cell in self.cells
            if cell.estimator == estimator and k_min <= cell.k <= k_max and cell.rmse is not None
        ]
        if not values:
            return math.nan
        return float(np.mean(values))

    def to_frame(self) -> pd.DataFrame:
        """Tabular view with the CSV column layout."""
        rows = [
            {
                "k": cell.k,
                "estimator": cell.estimator,
                "replicates": cell.replicates,
                "failures": cell.failures,
                "mean": cell.mean,
                "bias": cell.bias,
                "variance": cell.variance,
                "rmse": cell.rmse,
            }
            for cell in self.cells
        ]
        return pd.DataFrame(rows, columns=CSV_CONFIG["curve_columns"])


@dataclass(frozen=True)
class ReplicateMatrix:
    """
    Raw replicate values, shape (replicates, len(k_grid), len(estimators)).

    Failed evaluations are NaN.
    """

    k_grid: Tuple[int, ...]
    estimators: Tuple[str, ...]
    values: np.ndarray

    def column(self, k: int, estimator: str) -> np.ndarray:
        """All replicate values (NaN for failures) of one cell."""
        return self.values[:, self.k_grid.index(k), self.estimators.index(estimator)]

    def successes(self, k: int, estimator: str) -> np.ndarray:
        column = self.column(k, estimator)
        return column[~np.isnan(column)]

    def median(self, k: int, estimator: str) -> float:
        ok = self.successes(k, estimator)
        return float(np.median(ok)) if ok.size else math.nan

    def bias_standard_error(self, k: int, estimator: str) -> float:
        ok = self.successes(k, estimator)
        if ok.size < 2:
            return math.nan
        return float(np.std(ok, ddof=1) / math.sqrt(ok.size))

    def rmse_standard_error(self, k: int, estimator: str, truth: float) -> float:
        """Delta-method standard error of the RMSE."""
        ok = self.successes(k, estimator)
        if ok.size < 2:
            return math.nan
        squared = (ok - truth) ** 2
        rmse = math.sqrt(float(np.mean(squared)))
        if rmse == 0.0:
            return 0.0
        return float(np.std(squared, ddof=1) / math.sqrt(ok.size) / (2.0 * rmse))

    def summarize(self, truth: float) -> CurveResult:
        """Aggregate into a CurveResult; bias is measured against ``truth``."""
        replicates = int(self.values.shape[0])
        cells: List[CurveCell] = []
        for k in self.k_grid:
            for name in sorted(self.estimators):
                ok = self.successes(k, name)
                failures = replicates - int(ok.size)
                if ok.size == 0:
                    cells.append(CurveCell(k, name, replicates, failures, None, None, None, None))
                    continue
                mean = float(np.mean(ok))
                centered = float(np.mean((ok - mean) ** 2))
                mse = float(np.mean((ok - truth) ** 2))
                cells.append(
                    CurveCell(
                        k=k,
                        estimator=name,
                        replicates=replicates,
                        failures=failures,
                        mean=mean,
                        bias=mean - truth,
                        variance=centered,
                        rmse=math.sqrt(mse),
                    )
                )
        return CurveResult(cells=tuple(cells))


def lynden_bell_statistic(sample: ObservedSample, k: int) -> float:
    """Lynden-Bell integral Hill estimate at X*_{n-k,n}."""
    return evi_lynden_bell(sample, k).value


def gardes_stupfler_statistic(sample: ObservedSample, k: int) -> float:
    """Two-Hill baseline with k1 = k2 = k."""
    return evi_gardes_stupfler(sample, k, k).value


DEFAULT_ESTIMATORS: Dict[str, Statistic] = {
    EstimatorKind.GARDES_STUPFLER.value: gardes_stupfler_statistic,
    EstimatorKind.LYNDEN_BELL_HILL.value: lynden_bell_statistic,
}


def _relative_quantile_error(
    sample: ObservedSample, k: int, estimator: QuantileEstimator, p_n: float, true_quantile: float
) -> float:
    return estimator(sample, k, p_n) / true_quantile - 1.0


def _evaluate(statistic: Statistic, sample: ObservedSample, k: int) -> float:
    try:
        return float(statistic(sample, k))
    except TailEstimationError as e:
        logger.debug("replicate failure at k=%d: %s", k, e)
        return math.nan


def _simulate_chunk(
    model_x: HeavyTailModel,
    model_y: HeavyTailModel,
    n: int,
    seed: int,
    k_grid: Tuple[int, ...],
    statistics: Tuple[Tuple[str, Statistic], ...],
    replicates: Sequence[int],
) -> np.ndarray:
    """Evaluate every statistic at every k on the given replicate indices (module level for pickling)."""
    block = np.full((len(replicates), len(k_grid), len(statistics)), np.nan)
    for row, replicate in enumerate(replicates):
        sample = generate_truncated(model_x, model_y, n, replicate_rng(seed, replicate))
        for col, k in enumerate(k_grid):
            for depth, (_, statistic) in enumerate(statistics):
                block[row, col, depth] = _evaluate(statistic, sample, k)
    return block


def _chunks(count: int, size: int) -> List[List[int]]:
    return [list(range(start, min(start + size, count))) for start in range(0, count, size)]


def simulate_replicates(
    spec: ExperimentSpec,
    statistics: Dict[str, Statistic],
    workers: Optional[int] = None,
) -> ReplicateMatrix:
    """
    Evaluate named statistics on every replicate and every k of the grid.

    Args:
        spec: Experiment description
        statistics: Mapping name -> callable(sample, k) -> float; typed
            toolkit errors are recorded as failures (NaN)
        workers: Number of worker processes (default from configuration);
            parallel execution needs picklable statistics

    Returns:
        The raw replicate matrix
    """
    if not statistics:
        raise ConfigError("at least one statistic is required", key="estimators")
    workers = int(workers if workers is not None else SIMULATION_CONFIG["workers"])
    ordered = tuple(sorted(statistics.items()))
    worker = partial(_simulate_chunk, spec.model_x, spec.model_y, int(spec.n), int(spec.seed), spec.k_grid, ordered)
    chunks = _chunks(int(spec.replicates), int(SIMULATION_CONFIG["chunk_size"]))

    if workers > 1 and len(chunks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as executor:
            blocks = list(executor.map(worker, chunks))
    else:
        blocks = [worker(chunk) for chunk in chunks]

    return ReplicateMatrix(
        k_grid=spec.k_grid,
        estimators=tuple(name for name, _ in ordered),
        values=np.concatenate(blocks, axis=0),
    )


def run_bias_rmse(
    spec: ExperimentSpec,
    workers: Optional[int] = None,
    estimators: Optional[Dict[str, Statistic]] = None,
) -> CurveResult:
    """
    Bias and RMSE curves of the tail-index estimators against k.

    By default the Lynden-Bell estimator and the two-Hill baseline with
    k1 = k2 = k are compared; bias is measured against evi(model_x).

    Args:
        spec: Experiment description
        workers: Worker processes
        estimators: Optional replacement statistics (name -> callable(sample, k))
    """
    with LoggingContext(logger, f"bias/RMSE curves ({spec.replicates} replicates, n={spec.n})"):
        matrix = simulate_replicates(spec, estimators or DEFAULT_ESTIMATORS, workers)
        return matrix.summarize(spec.model_x.evi())


def simulate_quantile_errors(
    spec: ExperimentSpec,
    workers: Optional[int] = None,
    quantile_estimator: Optional[QuantileEstimator] = None,
) -> ReplicateMatrix:
    """
    Replicate matrix of relative errors x_hat / x_pn - 1 of the extreme quantile estimator.

    Raises:
        ConfigError: If spec.p_n is None
    """
    if spec.p_n is None:
        raise ConfigError("quantile experiments need p_n", key="pn")
    true_quantile = float(spec.model_x.isf(spec.p_n))
    statistic = partial(
        _relative_quantile_error,
        estimator=quantile_estimator or quantile_weissman,
        p_n=float(spec.p_n),
        true_quantile=true_quantile,
    )
    return simulate_replicates(spec, {EstimatorKind.LYNDEN_BELL_HILL.value: statistic}, workers)


def run_quantile_curve(
    spec: ExperimentSpec,
    workers: Optional[int] = None,
    quantile_estimator: Optional[QuantileEstimator] = None,
) -> CurveResult:
    """
    Bias and RMSE curves of x_hat / x_pn - 1 against k (the target value is 0).

    Extrapolation-order and degeneracy failures are counted per cell.
    """
    with LoggingContext(logger, f"quantile curves (p_n={spec.p_n}, {spec.replicates} replicates)"):
        return simulate_quantile_errors(spec, workers, quantile_estimator).summarize(0.0)


@dataclass(frozen=True)
class CltReport:
    """
    Normality check of sqrt((p/alpha) k) (gamma_n - gamma1).

    Attributes:
        variance: Empirical variance (ddof=1), None with fewer than two successes
        variance_ratio: variance / s2
        ks_statistic: Kolmogorov-Smirnov distance to the moment-matched normal
    """

    n: int
    k: int
    replicates: int
    failures: int
    scale: float
    s2: float
    mean: Optional[float]
    variance: Optional[float]
    variance_ratio: Optional[float]
    ks_statistic: Optional[float]

    @property
    def variance_defined(self) -> bool:
        return self.variance is not None

    def within_bands(self) -> bool:
        """True when the variance ratio and KS distance fall inside the configured bands."""
        if self.variance_ratio is None or self.ks_statistic is None:
            return False
        return (
            CLT_CONFIG["variance_ratio_low"] <= self.variance_ratio <= CLT_CONFIG["variance_ratio_high"]
            and self.ks_statistic <= CLT_CONFIG["ks_threshold"]
        )

    def as_report(self) -> Dict[str, Any]:
        return {
            "n": self.n,
            "k": self.k,
            "replicates": self.replicates,
            "failures": self.failures,
            "scale": self.scale,
            "s2": self.s2,
            "mean": self.mean,
            "variance": self.variance,
            "variance_ratio": self.variance_ratio,
            "ks_statistic": self.ks_statistic,
        }


def run_clt_check(
    model_x: HeavyTailModel,
    model_y: HeavyTailModel,
    n: int,
    k: int,
    replicates: int,
    seed: int,
    workers: Optional[int] = None,
) -> CltReport:
    """
    Compare the spread of normalized Lynden-Bell estimates with the asymptotic variance s^2.

    Each replicate estimate is standardized as sqrt((p/alpha) k) (gamma_n - gamma1);
    the mean shift lambda m is not assessed.

    Raises:
        TheoryDomainError: If evi(model_x) >= evi(model_y)
    """
    gamma1, gamma2 = model_x.evi(), model_y.evi()
    p = nontruncation_prob(model_x, model_y)
    s2 = variance(p, gamma1, gamma2)
    scale = math.sqrt(p / alpha(gamma1, gamma2) * k)
    spec = ExperimentSpec(model_x, model_y, n, replicates, k_grid=(k,), seed=seed)

    with LoggingContext(logger, f"CLT check (n={n}, k={k}, {replicates} replicates)"):
        matrix = simulate_replicates(spec, {EstimatorKind.LYNDEN_BELL_HILL.value: lynden_bell_statistic}, workers)

    estimates = matrix.successes(k, EstimatorKind.LYNDEN_BELL_HILL.value)
    z = scale * (estimates - gamma1)
    failures = int(replicates - z.size)
    mean = float(np.mean(z)) if z.size else None
    var: Optional[float] = None
    ratio: Optional[float] = None
    ks: Optional[float] = None
    if z.size >= 2:
        var = float(np.var(z, ddof=1))
        ratio = var / s2
        if var > 0:
            ks = float(stats.kstest(z, "norm", args=(mean, math.sqrt(var))).statistic)
    else:
        logger.warning("CLT check has %d successful replicate(s); variance undefined", z.size)

    return CltReport(
        n=int(n), k=int(k), replicates=int(replicates), failures=failures, scale=scale, s2=s2,
        mean=mean, variance=var, variance_ratio=ratio, ks_statistic=ks,
    )


def sup_deviation(sample: ObservedSample, model_x: HeavyTailModel, t: float) -> float:
    """
    Return sup_{x > t} |F_n(x) - F(x)| for the Lynden-Bell estimator F_n.

    F_n is a step function and F is continuous, so the supremum is attained
    just above t or on either side of a jump.
    """
    suffix = sample.suffix_products
    index = int(np.searchsorted(sample.sorted_x, t, side="right"))
    deviation = abs(float(suffix[index]) - float(model_x.cdf(t)))
    if index < sample.n:
        truth = np.asarray(model_x.cdf(sample.sorted_x[index:]), dtype=float)
        deviation = max(
            deviation,
            float(np.max(np.abs(suffix[index + 1:] - truth))),
            float(np.max(np.abs(suffix[index:-1] - truth))),
        )
    return deviation


@dataclass(frozen=True)
class SupDeviationReport:
    """Median over replicates of sqrt(n) sup_{x>t} |F_n(x) - F(x)|."""

    n: int
    threshold: float
    replicates: int
    median: float


def run_sup_deviation_check(
    model_x: HeavyTailModel,
    model_y: HeavyTailModel,
    n: int,
    replicates: int,
    seed: int,
    level: float = 0.9,
) -> SupDeviationReport:
    """
    Scaled uniform deviation of the Lynden-Bell estimator above t = F^{-1}(level).

    The median should stay bounded as n grows.
    """
    t = float(model_x.quantile(level))
    values = np.empty(int(replicates))
    for replicate in range(int(replicates)):
        sample = generate_truncated(model_x, model_y, n, replicate_rng(seed, replicate))
        values[replicate] = math.sqrt(n) * sup_deviation(sample, model_x, t)
    return SupDeviationReport(n=int(n), threshold=t, replicates=int(replicates), median=float(np.median(values)))


def run_consistency_sweep(
    model_x: HeavyTailModel,
    model_y: HeavyTailModel,
    sizes: Sequence[int],
    fraction: float,
    replicates: int,
    seed: int,
    workers: Optional[int] = None,
) -> Dict[int, ReplicateMatrix]:
    """
    Replicate matrices of the default estimators at k = round(fraction n) for each n in sizes.
    """
    results: Dict[int, ReplicateMatrix] = {}
    for n in sizes:
        k = max(1, min(int(n) - 1, int(round(fraction * n))))
        spec = ExperimentSpec(model_x, model_y, int(n), replicates, k_grid=(k,), seed=seed)
        with LoggingContext(logger, f"consistency sweep n={n}, k={k}"):
            results[int(n)] = simulate_replicates(spec, DEFAULT_ESTIMATORS, workers)
    return results
