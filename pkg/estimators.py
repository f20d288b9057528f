"""
Nonparametric Tail Estimators for Randomly Right-Truncated Data.

A pair (X, Y) is observed only when X <= Y. Given the observed pairs
(X*_i, Y*_i), this module computes:

    C_n(x)      = (1/n) #{i : X*_i <= x <= Y*_i}
    F_n(x)      = prod_{X*_i > x} (1 - 1/(n C_n(X*_i)))       (Lynden-Bell)
    Lambda_n(t) = -log F_n(t),  hat Lambda_n(t) = sum_{X*_i > t} 1/(n C_n(X*_i))
    gamma_n     = 1/(n Fbar_n(t)) sum_{X*_i > t} log(X*_i/t) F_n(X*_i)/C_n(X*_i)
    x_hat       = t (Fbar_n(t)/p_n)^gamma_n                    (Weissman)

together with the classical Hill estimator and the two-Hill baseline
g1* g2 / (g2 - g1*) that corrects the observed tail index for truncation.

Everything is computed from one sort of each coordinate: n C_n at all data
points and the suffix products of the Lynden-Bell factors are built once when
the sample is constructed, so each estimator call afterwards costs O(k) or
O(log n).

F_n(X*_i) inside gamma_n is the right-continuous value (product over points
strictly greater than X*_i). With no truncation this makes every weight
F_n/C_n equal to one and gamma_n coincides with the Hill estimator exactly.
"""

import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Optional, Sequence, Tuple, Union

import numpy as np

from errors import (
    DegenerateCombinationError,
    DegenerateMassError,
    DegenerateThresholdError,
    EstimatorDomainError,
    ExtrapolationOrderError,
    SampleValidationError,
    TiedObservationError,
    TruncationOrderError,
)
from logging_utils import get_logger

logger = get_logger(__name__)


class EstimatorKind(str, Enum):
    """Identifiers of the tail-index estimators, also used as CSV labels."""

    LYNDEN_BELL_HILL = "lynden_bell_hill"
    GARDES_STUPFLER = "gardes_stupfler"
    HILL = "hill"


@dataclass(frozen=True)
class EviEstimate:
    """
    A tail-index estimate with its threshold bookkeeping.

    Attributes:
        value: The estimate of the extreme value index
        k: Number of exceedances used
        threshold: The threshold t (X*_{n-k,n} in random-threshold mode)
        kind: Which estimator produced the value
        degenerate_mass_at: The degenerate point T when it lies above the threshold
        tail_mass: Fbar_n(t) for the Lynden-Bell estimator, None otherwise
    """

    value: float
    k: int
    threshold: float
    kind: EstimatorKind
    degenerate_mass_at: Optional[float] = None
    tail_mass: Optional[float] = None


class ObservedSample:
    """
    The observed (conditionally i.i.d.) truncated dataset {(X*_i, Y*_i)}.

    Construction validates x <= y on every pair and rejects tied x values,
    then performs the single sort-and-sweep shared by all estimators. The
    object is immutable afterwards and safe to share between threads.

    Args:
        x_star: Observed values of the variable of interest
        y_star: Observed values of the truncating variable

    Raises:
        SampleValidationError: Empty sample, mismatched lengths or nonpositive values
        TruncationOrderError: A pair with x > y (``row`` is its 0-based index)
        TiedObservationError: Two identical x values

    Example:
        >>> sample = ObservedSample([1.0, 2.0], [3.0, 2.0])
        >>> c_n(sample, 1.0)
        0.5
    """

    def __init__(self, x_star: Iterable[float], y_star: Iterable[float]) -> None:
        x = np.array(x_star, dtype=float).ravel()
        y = np.array(y_star, dtype=float).ravel()

        if x.size == 0:
            raise SampleValidationError("observed sample is empty")
        if x.size != y.size:
            raise SampleValidationError(f"x and y lengths differ ({x.size} vs {y.size})")
        if not (np.all(np.isfinite(x)) and np.all(x > 0)):
            raise SampleValidationError("observed x values must be positive and finite")
        if np.any(np.isnan(y)) or np.any(y <= 0):
            raise SampleValidationError("observed y values must be positive")

        violations = np.flatnonzero(x > y)
        if violations.size:
            row = int(violations[0])
            raise TruncationOrderError(
                f"pair {row} violates the truncation condition x <= y ({x[row]!r} > {y[row]!r})", row=row
            )

        sorted_x = np.sort(x)
        ties = np.flatnonzero(np.diff(sorted_x) == 0)
        if ties.size:
            value = float(sorted_x[ties[0]])
            raise TiedObservationError(f"tied x value {value!r}; the x law must be continuous", value=value)

        sorted_y = np.sort(y)
        # n C_n(X*_(j)) = #{x*_i <= X*_(j)} - #{y*_i < X*_(j)} = j - #{y*_i < X*_(j)}
        ranks = np.arange(1, x.size + 1)
        risk_counts = ranks - np.searchsorted(sorted_y, sorted_x, side="left")
        factors = 1.0 - 1.0 / risk_counts
        # suffix[j] = prod_{l >= j} factors[l]; suffix[n] = 1 (empty product)
        suffix = np.ones(x.size + 1)
        suffix[:-1] = np.cumprod(factors[::-1])[::-1]

        singletons = np.flatnonzero(risk_counts == 1)
        self._degenerate_point: Optional[float] = float(sorted_x[singletons[-1]]) if singletons.size else None

        for array in (x, y, sorted_x, sorted_y, risk_counts, suffix):
            array.setflags(write=False)
        self._x = x
        self._y = y
        self._sorted_x = sorted_x
        self._sorted_y = sorted_y
        self._risk_counts = risk_counts
        self._suffix = suffix

    @classmethod
    def from_pairs(cls, pairs: Iterable[Tuple[float, float]]) -> "ObservedSample":
        """Build a sample from an iterable of (x_star, y_star) pairs."""
        pair_list = list(pairs)
        return cls([p[0] for p in pair_list], [p[1] for p in pair_list])

    @property
    def n(self) -> int:
        """Number of observed pairs."""
        return int(self._x.size)

    @property
    def x_star(self) -> np.ndarray:
        """Observed x values in input order (read-only)."""
        return self._x

    @property
    def y_star(self) -> np.ndarray:
        """Observed y values in input order (read-only)."""
        return self._y

    @property
    def sorted_x(self) -> np.ndarray:
        """Order statistics X*_{1,n} < ... < X*_{n,n}."""
        return self._sorted_x

    @property
    def sorted_y(self) -> np.ndarray:
        """Order statistics of the observed y values."""
        return self._sorted_y

    @property
    def risk_counts(self) -> np.ndarray:
        """Integer n C_n(X*_{j,n}) at every order statistic of x."""
        return self._risk_counts

    @property
    def suffix_products(self) -> np.ndarray:
        """suffix[j] = F_n just below sorted_x[j] (0-based), so F_n(sorted_x[j]) = suffix[j + 1]; suffix[n] = 1."""
        return self._suffix

    @property
    def degenerate_point(self) -> Optional[float]:
        """T = max{X*_i : n C_n(X*_i) = 1}, or None."""
        return self._degenerate_point

    def pairs(self) -> Sequence[Tuple[float, float]]:
        """Return the pairs in input order."""
        return list(zip(self._x.tolist(), self._y.tolist()))

    def count_above(self, t: float) -> int:
        """Number of x values strictly greater than t."""
        return int(self.n - np.searchsorted(self._sorted_x, t, side="right"))

    def __len__(self) -> int:
        return self.n

    def __repr__(self) -> str:
        return f"ObservedSample(n={self.n})"


def _check_k(sample_size: int, k: int) -> int:
    if isinstance(k, bool) or int(k) != k:
        raise EstimatorDomainError(f"k must be an integer, got {k!r}")
    k = int(k)
    if not 1 <= k < sample_size:
        raise EstimatorDomainError(f"k must satisfy 1 <= k < n = {sample_size}, got {k}")
    return k


def random_threshold(sample: ObservedSample, k: int) -> float:
    """
    Return the random threshold X*_{n-k,n}, above which exactly k points lie.

    Raises:
        EstimatorDomainError: If k is outside [1, n-1]
    """
    k = _check_k(sample.n, k)
    return float(sample.sorted_x[sample.n - k - 1])


def c_n(sample: ObservedSample, x: float) -> float:
    """
    Empirical coverage C_n(x) = (1/n) #{i : x*_i <= x <= y*_i}.

    Args:
        sample: Observed sample
        x: Evaluation point (> 0)

    Returns:
        The fraction j/n; ``c_n_count`` returns the integer j
    """
    return c_n_count(sample, x) / sample.n


def c_n_count(sample: ObservedSample, x: float) -> int:
    """Return the integer n C_n(x)."""
    covered_from_left = np.searchsorted(sample.sorted_x, x, side="right")
    ended_before = np.searchsorted(sample.sorted_y, x, side="left")
    return int(covered_from_left - ended_before)


def lynden_bell_cdf(sample: ObservedSample, x: float) -> float:
    """
    Lynden-Bell estimator F_n(x) = prod_{X*_i > x} (1 - 1/(n C_n(X*_i))).

    The empty product is 1. The result is a right-continuous, nondecreasing
    step function of x, equal to 0 below the degenerate point T.

    Args:
        sample: Observed sample
        x: Evaluation point (>= 0)

    Returns:
        F_n(x) in [0, 1]
    """
    index = int(np.searchsorted(sample.sorted_x, x, side="right"))
    return float(sample.suffix_products[index])


def lynden_bell_survival(sample: ObservedSample, x: float) -> float:
    """Return Fbar_n(x) = 1 - F_n(x)."""
    return 1.0 - lynden_bell_cdf(sample, x)


def hazard_sum(sample: ObservedSample, t: float) -> float:
    """
    Cumulative hazard estimate hat Lambda_n(t) = sum_{X*_i > t} 1/(n C_n(X*_i)).

    Always finite.
    """
    index = int(np.searchsorted(sample.sorted_x, t, side="right"))
    return float(np.sum(1.0 / sample.risk_counts[index:]))


def hazard_log(sample: ObservedSample, t: float) -> float:
    """
    Cumulative hazard estimate Lambda_n(t) = -log F_n(t).

    Raises:
        DegenerateMassError: If F_n(t) = 0, i.e. the degenerate point T lies above t
    """
    value = lynden_bell_cdf(sample, t)
    if value <= 0.0:
        raise DegenerateMassError(
            f"Lynden-Bell estimate vanishes at t={t!r}: degenerate point T={sample.degenerate_point!r} lies above it",
            degenerate_point=sample.degenerate_point,
        )
    return -math.log(value)


def degenerate_point(sample: ObservedSample) -> Optional[float]:
    """
    Return T = max{X*_i : n C_n(X*_i) = 1}, or None when no point has n C_n = 1.

    Above T the Lynden-Bell factors are all positive; at T the product
    collapses to zero.
    """
    return sample.degenerate_point


def _lynden_bell_tail(sample: ObservedSample, start: int, threshold: float, k: int) -> EviEstimate:
    """Evaluate gamma_n over the sorted points sample.sorted_x[start:], all > threshold."""
    suffix = sample.suffix_products
    lower_mass = float(suffix[start])
    tail_mass = 1.0 - lower_mass
    T = sample.degenerate_point
    if lower_mass <= 0.0:
        logger.debug("degenerate Lynden-Bell mass: T=%r above t=%r (k=%d)", T, threshold, k)
        raise DegenerateThresholdError(
            f"degenerate point T={T!r} lies above the threshold t={threshold!r}; F_n(t) = 0",
            degenerate_point=T,
        )
    if tail_mass <= 0.0:
        raise DegenerateThresholdError(
            f"Lynden-Bell tail mass above t={threshold!r} is zero", degenerate_point=T
        )

    exceedances = sample.sorted_x[start:]
    # F_n(X*_(j)) / (n C_n(X*_(j))) with F_n right-continuous at the point
    weights = suffix[start + 1:] / sample.risk_counts[start:]
    value = float(np.sum(np.log(exceedances / threshold) * weights) / tail_mass)
    return EviEstimate(
        value=value,
        k=k,
        threshold=float(threshold),
        kind=EstimatorKind.LYNDEN_BELL_HILL,
        tail_mass=tail_mass,
    )


def evi_lynden_bell(sample: ObservedSample, k: int) -> EviEstimate:
    """
    Lynden-Bell integral version of the Hill estimator at the random threshold X*_{n-k,n}.

    Args:
        sample: Observed sample
        k: Number of exceedances, 1 <= k < n

    Returns:
        The estimate, with threshold and Fbar_n(t) bookkeeping

    Raises:
        EstimatorDomainError: If k is out of range
        DegenerateThresholdError: If F_n(t) = 0 (T above the threshold) or Fbar_n(t) = 0
    """
    k = _check_k(sample.n, k)
    start = sample.n - k
    threshold = float(sample.sorted_x[start - 1])
    return _lynden_bell_tail(sample, start, threshold, k)


def evi_lynden_bell_at(sample: ObservedSample, t: float) -> EviEstimate:
    """
    Lynden-Bell integral Hill estimator at a deterministic threshold t.

    Raises:
        EstimatorDomainError: If t is not positive or no observation exceeds t
        DegenerateThresholdError: As for evi_lynden_bell
    """
    if not t > 0:
        raise EstimatorDomainError(f"threshold must be positive, got {t!r}")
    start = int(np.searchsorted(sample.sorted_x, t, side="right"))
    k = sample.n - start
    if k == 0:
        raise EstimatorDomainError(f"no observation exceeds the threshold t={t!r}")
    return _lynden_bell_tail(sample, start, float(t), k)


def hill(values: Union[Sequence[float], np.ndarray], k: int) -> float:
    """
    Classical Hill estimator over the top k order statistics.

    Args:
        values: Positive observations
        k: Number of upper order statistics, 1 <= k < len(values)

    Returns:
        (1/k) sum_{i=1..k} log(X_{n-i+1,n} / X_{n-k,n})

    Raises:
        EstimatorDomainError: If values are not positive or k is out of range
    """
    data = np.asarray(values, dtype=float)
    if data.size == 0 or np.any(~(data > 0)):
        raise EstimatorDomainError("Hill estimator requires positive values")
    k = _check_k(data.size, k)
    return _hill_sorted(np.sort(data), k)


def _hill_sorted(sorted_values: np.ndarray, k: int) -> float:
    n = sorted_values.size
    top = sorted_values[n - k:]
    return float(np.mean(np.log(top / sorted_values[n - k - 1])))


def _point_above(sample: ObservedSample, threshold: float) -> Optional[float]:
    T = sample.degenerate_point
    return T if T is not None and T > threshold else None


def evi_hill(sample: ObservedSample, k: int) -> EviEstimate:
    """Hill estimator applied to the observed x values, ignoring truncation."""
    k = _check_k(sample.n, k)
    threshold = float(sample.sorted_x[sample.n - k - 1])
    return EviEstimate(
        value=_hill_sorted(sample.sorted_x, k),
        k=k,
        threshold=threshold,
        kind=EstimatorKind.HILL,
        degenerate_mass_at=_point_above(sample, threshold),
    )


def combine_gardes_stupfler(gamma1_star: float, gamma2: float) -> float:
    """
    Invert gamma1* = gamma1 gamma2 / (gamma1 + gamma2) for gamma1.

    Args:
        gamma1_star: Tail index estimate of the observed x values
        gamma2: Tail index estimate of the truncating variable

    Returns:
        gamma1* gamma2 / (gamma2 - gamma1*)

    Raises:
        DegenerateCombinationError: If the two estimates coincide
    """
    denominator = gamma2 - gamma1_star
    if denominator == 0.0:
        raise DegenerateCombinationError(
            f"baseline undefined: both Hill estimates equal {gamma2!r}"
        )
    if math.isinf(gamma2):
        return float(gamma1_star)
    return gamma1_star * gamma2 / denominator


def evi_gardes_stupfler(sample: ObservedSample, k1: int, k2: int) -> EviEstimate:
    """
    Two-Hill baseline estimator of the truncated tail index.

    Hill on x_star with k1 estimates gamma1*, Hill on y_star with k2 estimates
    gamma2, and the two are combined by combine_gardes_stupfler.

    Args:
        sample: Observed sample
        k1: Exceedances used on the x values
        k2: Exceedances used on the y values

    Raises:
        EstimatorDomainError: If k1 or k2 is out of range
        DegenerateCombinationError: If the two Hill estimates coincide
    """
    k1 = _check_k(sample.n, k1)
    k2 = _check_k(sample.n, k2)
    gamma1_star = _hill_sorted(sample.sorted_x, k1)
    gamma2 = _hill_sorted(sample.sorted_y, k2)
    threshold = float(sample.sorted_x[sample.n - k1 - 1])
    return EviEstimate(
        value=float(combine_gardes_stupfler(gamma1_star, gamma2)),
        k=k1,
        threshold=threshold,
        kind=EstimatorKind.GARDES_STUPFLER,
        degenerate_mass_at=_point_above(sample, threshold),
    )


def weissman_quantile(threshold: float, tail_prob: float, p_n: float, gamma: float) -> float:
    """
    Weissman extrapolation t (tail_prob / p_n)^gamma.

    Args:
        threshold: The threshold t
        tail_prob: Estimated tail probability above t
        p_n: Target tail probability, 0 < p_n < tail_prob
        gamma: Tail index estimate

    Raises:
        ExtrapolationOrderError: If p_n is not strictly below tail_prob
    """
    if not 0.0 < p_n < tail_prob:
        raise ExtrapolationOrderError(
            f"p_n={p_n!r} must lie strictly between 0 and the tail mass above the threshold ({tail_prob!r})"
        )
    return float(threshold * (tail_prob / p_n) ** gamma)


def quantile_weissman(sample: ObservedSample, k: int, p_n: float) -> float:
    """
    Extreme quantile estimate t (Fbar_n(t)/p_n)^gamma_n at t = X*_{n-k,n}.

    Args:
        sample: Observed sample
        k: Number of exceedances
        p_n: Tail probability of the target quantile

    Raises:
        ExtrapolationOrderError: If p_n >= Fbar_n(t)
        DegenerateThresholdError: If the tail-index estimate is degenerate
    """
    estimate = evi_lynden_bell(sample, k)
    return _weissman_from(estimate, p_n)


def quantile_weissman_at(sample: ObservedSample, t: float, p_n: float) -> float:
    """Extreme quantile estimate at a deterministic threshold t."""
    estimate = evi_lynden_bell_at(sample, t)
    return _weissman_from(estimate, p_n)


def _weissman_from(estimate: EviEstimate, p_n: float) -> float:
    assert estimate.tail_mass is not None
    return weissman_quantile(estimate.threshold, estimate.tail_mass, p_n, estimate.value)
