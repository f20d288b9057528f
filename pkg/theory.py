"""
Asymptotic Constants for the Truncated Tail-Index Estimator.

Closed-form quantities governing the limit law of the Lynden-Bell integral
Hill estimator, and quadrature utilities that connect a pair of models
(X law, truncating Y law) to them.

With gamma1 < gamma2 the extreme value indices of X and Y:

    alpha = gamma2 / (gamma1 + gamma2)                 tail non-truncation probability
    m     = gamma1^2 / (1 - gamma1 rho1)  (rho1 < 0),  gamma1^2  (rho1 = 0)
    s^2   = p gamma1^2 (1 + r^2) (1 - r)^-3,  r = gamma1/gamma2
    c_k   = gamma1^k k! / (1 - r)^(k+1)

and sqrt(n Hbar(t_n)) (gamma_n - gamma1) is asymptotically N(lambda m, s^2),
where Hbar = Fbar Gbar and p = P(X <= Y).

Integrals over the heavy tail are computed on a probability scale: the
variable of integration is a (rescaled) tail probability of X, so every
integrand lives on a bounded interval and the only singularity is an
integrable power at one endpoint.
"""

import math
from dataclasses import dataclass
from typing import Any, Callable, Dict, Optional, Tuple

import numpy as np
from scipy import integrate, optimize

from config import QUADRATURE_CONFIG
from errors import QuadratureError, TheoryDomainError
from logging_utils import get_logger
from models import HeavyTailModel

logger = get_logger(__name__)


def _check_indices(gamma1: float, gamma2: float) -> None:
    if not (gamma1 > 0 and gamma2 > 0):
        raise TheoryDomainError(f"extreme value indices must be positive, got {gamma1!r}, {gamma2!r}")


def _check_ordered(gamma1: float, gamma2: float) -> None:
    _check_indices(gamma1, gamma2)
    if not gamma1 < gamma2:
        raise TheoryDomainError(
            f"the truncating tail must be heavier than the truncated one: need gamma1 < gamma2, "
            f"got {gamma1!r} >= {gamma2!r}"
        )


def alpha(gamma1: float, gamma2: float) -> float:
    """
    Ultimate probability of non-truncation in the tail, gamma2 / (gamma1 + gamma2).

    Example:
        >>> alpha(0.25, 0.5)
        0.6666666666666666
    """
    _check_indices(gamma1, gamma2)
    if math.isinf(gamma2):
        return 1.0
    return gamma2 / (gamma1 + gamma2)


def observed_evi(gamma1: float, gamma2: float) -> float:
    """Extreme value index of the observed x values, gamma1 gamma2 / (gamma1 + gamma2)."""
    _check_indices(gamma1, gamma2)
    if math.isinf(gamma2):
        return float(gamma1)
    return gamma1 * gamma2 / (gamma1 + gamma2)


def mean_shift(gamma1: float, rho1: float) -> float:
    """
    Asymptotic mean-shift constant m.

    Args:
        gamma1: Extreme value index of X
        rho1: Second-order index (<= 0), supplied by the caller

    Raises:
        TheoryDomainError: If rho1 > 0
    """
    if not gamma1 > 0:
        raise TheoryDomainError(f"gamma1 must be positive, got {gamma1!r}")
    if not rho1 <= 0:
        raise TheoryDomainError(f"rho1 must be <= 0, got {rho1!r}")
    if rho1 == 0:
        return gamma1 ** 2
    return gamma1 ** 2 / (1.0 - gamma1 * rho1)


def variance(p: float, gamma1: float, gamma2: float) -> float:
    """
    Asymptotic variance s^2 = p gamma1^2 (1 + r^2) (1 - r)^-3 with r = gamma1/gamma2.

    Raises:
        TheoryDomainError: If p is outside (0, 1] or gamma1 >= gamma2
    """
    if not 0 < p <= 1:
        raise TheoryDomainError(f"non-truncation probability must lie in (0, 1], got {p!r}")
    _check_ordered(gamma1, gamma2)
    r = gamma1 / gamma2
    return p * gamma1 ** 2 * (1.0 + r ** 2) * (1.0 - r) ** -3


def c_k(gamma1: float, gamma2: float, k: int) -> float:
    """
    Tail integral constant c_k = gamma1^k k! / (1 - gamma1/gamma2)^(k+1).

    Raises:
        TheoryDomainError: If gamma1 >= gamma2 or k is negative
    """
    _check_ordered(gamma1, gamma2)
    if int(k) != k or k < 0:
        raise TheoryDomainError(f"k must be a nonnegative integer, got {k!r}")
    q = 1.0 - gamma1 / gamma2
    return gamma1 ** k * math.factorial(int(k)) / q ** (int(k) + 1)


def log_moment_integral(theta: float, k: int) -> float:
    """Closed form of the integral of log^k(y) y^(-theta-1) over [1, inf): k! / theta^(k+1)."""
    if not theta > 0:
        raise TheoryDomainError(f"theta must be positive, got {theta!r}")
    return math.factorial(int(k)) / theta ** (int(k) + 1)


def _integrate(func: Callable[[float], float], a: float, b: float, what: str) -> float:
    """
    Adaptive quadrature with convergence checking.

    Raises:
        QuadratureError: If scipy reports a problem and the error estimate
            exceeds the configured target tolerance
    """
    result: Tuple[Any, ...] = integrate.quad(
        func,
        a,
        b,
        epsabs=QUADRATURE_CONFIG["epsabs"],
        epsrel=QUADRATURE_CONFIG["epsrel"],
        limit=QUADRATURE_CONFIG["limit"],
        full_output=1,
    )
    value, abserr = float(result[0]), float(result[1])
    if not math.isfinite(value):
        raise QuadratureError(f"quadrature for {what} produced a non-finite value")
    if len(result) > 3:
        message = result[3]
        if abserr > QUADRATURE_CONFIG["target_abstol"]:
            raise QuadratureError(f"quadrature for {what} did not converge (error {abserr:.3g}): {message}")
        logger.warning("quadrature for %s reported: %s (error %.3g accepted)", what, message, abserr)
    return value


def _tail_integral(model_x: HeavyTailModel, model_y: HeavyTailModel, upper: float) -> float:
    """Integral of Gbar dF over {Fbar_X < upper}, written over s = Fbar_X(x) in (0, upper)."""

    def integrand(s: float) -> float:
        return float(model_y.survival(model_x.isf(s)))

    return _integrate(integrand, 0.0, upper, "tail integral of Gbar dF")


def nontruncation_prob(model_x: HeavyTailModel, model_y: HeavyTailModel) -> float:
    """
    Probability of non-truncation p = P(X <= Y), the integral of Gbar dF.

    Args:
        model_x: Law of the truncated variable X
        model_y: Law of the truncating variable Y

    Returns:
        p in (0, 1]

    Raises:
        QuadratureError: If the quadrature fails to converge
    """
    return min(1.0, _tail_integral(model_x, model_y, 1.0))


def estimate_nontruncation_prob(model_x: HeavyTailModel, model_y: HeavyTailModel, draws: int, rng: Any) -> float:
    """
    Monte Carlo acceptance rate of the truncation mechanism.

    Used to cross-check nontruncation_prob.

    Args:
        model_x: Law of X
        model_y: Law of Y
        draws: Number of independent (X, Y) draws
        rng: numpy Generator
    """
    x = model_x.sample(rng, draws)
    y = model_y.sample(rng, draws)
    return float(np.mean(x <= y))


def observed_survival(model_x: HeavyTailModel, model_y: HeavyTailModel, t: float, p: Optional[float] = None) -> float:
    """
    Survival function of the observed x values, (1/p) times the integral of Gbar dF over (t, inf).

    Args:
        model_x: Law of X
        model_y: Law of Y
        t: Evaluation point
        p: Non-truncation probability if already known
    """
    if p is None:
        p = nontruncation_prob(model_x, model_y)
    upper = float(model_x.survival(t))
    if upper <= 0.0:
        return 0.0
    return min(1.0, _tail_integral(model_x, model_y, upper) / p)


def observed_quantile(model_x: HeavyTailModel, model_y: HeavyTailModel, level: float, p: Optional[float] = None) -> float:
    """
    Quantile of the observed x law: the t solving observed_survival(t) = 1 - level.

    Raises:
        TheoryDomainError: If level is outside (0, 1)
    """
    if not 0 < level < 1:
        raise TheoryDomainError(f"quantile level must lie in (0, 1), got {level!r}")
    if p is None:
        p = nontruncation_prob(model_x, model_y)
    target = 1.0 - level
    low = model_x.lower_endpoint()
    # observed_survival(t) <= Fbar_X(t) / p, so this point is already past the target
    high = float(model_x.isf(min(1.0, target * p)))
    if high <= low:
        return float(high)

    def excess(t: float) -> float:
        return observed_survival(model_x, model_y, t, p) - target

    return float(optimize.brentq(excess, low, high, xtol=1e-13 * high, rtol=1e-12, maxiter=200))


@dataclass(frozen=True)
class RateBridge:
    """
    Check of the rate normalization n Hbar(t) against (p/alpha) k.

    Attributes:
        threshold: The (1 - k/n) quantile of the observed x law
        n_hbar: n Fbar_X(t) Gbar_Y(t)
        approximation: (p / alpha) k
    """

    threshold: float
    n_hbar: float
    approximation: float

    @property
    def relative_error(self) -> float:
        return abs(self.n_hbar / self.approximation - 1.0)


def rate_bridge(model_x: HeavyTailModel, model_y: HeavyTailModel, n: int, k: int) -> RateBridge:
    """
    Compare n Hbar(t) with (p/alpha) k, t being the (1 - k/n) quantile of the observed x law.

    For exact power tails the integral of Gbar dF over (t, inf) equals
    alpha Hbar(t), so the two agree up to quadrature error.
    """
    if not 1 <= k < n:
        raise TheoryDomainError(f"need 1 <= k < n, got k={k}, n={n}")
    p = nontruncation_prob(model_x, model_y)
    tail_alpha = alpha(model_x.evi(), model_y.evi())
    threshold = observed_quantile(model_x, model_y, 1.0 - k / n, p)
    n_hbar = n * float(model_x.survival(threshold)) * float(model_y.survival(threshold))
    return RateBridge(threshold=threshold, n_hbar=n_hbar, approximation=p / tail_alpha * k)


def tail_log_moment_ratio(model_x: HeavyTailModel, model_y: HeavyTailModel, k: int, t: float) -> float:
    """
    Normalized tail integral whose limit is c_k.

    Computes the integral of log^k(x/t) dF(x)/Gbar(x) over (t, inf), divided
    by Fbar(t)/Gbar(t). Substituting Fbar(x) = Fbar(t) w turns it into

        integral over w in (0, 1) of log^k(x_w / t) Gbar(t) / Gbar(x_w),  x_w = F^{-1}(1 - Fbar(t) w)

    Args:
        model_x: Law of X
        model_y: Law of Y
        k: Power of the logarithm (>= 0)
        t: Threshold inside both supports

    Raises:
        TheoryDomainError: If t is outside the supports or k is negative
        QuadratureError: If the quadrature fails to converge
    """
    if int(k) != k or k < 0:
        raise TheoryDomainError(f"k must be a nonnegative integer, got {k!r}")
    tail_x = float(model_x.survival(t))
    tail_y = float(model_y.survival(t))
    if not (t > 0 and tail_x > 0 and tail_y > 0):
        raise TheoryDomainError(f"threshold t={t!r} must lie inside the supports of both models")

    power = int(k)

    def integrand(w: float) -> float:
        x = float(model_x.isf(tail_x * w))
        return math.log(x / t) ** power * tail_y / float(model_y.survival(x))

    return _integrate(integrand, 0.0, 1.0, f"tail log-moment of order {power}")


@dataclass(frozen=True)
class TheoryConstants:
    """
    Asymptotic quantities for a (truncated, truncating) model pair.

    Attributes:
        gamma1: Extreme value index of X
        gamma2: Extreme value index of Y (gamma1 < gamma2)
        p: Non-truncation probability P(X <= Y)
        rho1: Second-order index of X, supplied by the caller (None if unknown)
    """

    gamma1: float
    gamma2: float
    p: float
    rho1: Optional[float] = None

    def __post_init__(self) -> None:
        _check_ordered(self.gamma1, self.gamma2)
        if not 0 < self.p <= 1:
            raise TheoryDomainError(f"non-truncation probability must lie in (0, 1], got {self.p!r}")
        if self.rho1 is not None and not self.rho1 <= 0:
            raise TheoryDomainError(f"rho1 must be <= 0, got {self.rho1!r}")

    @classmethod
    def from_models(
        cls, model_x: HeavyTailModel, model_y: HeavyTailModel, rho1: Optional[float] = None
    ) -> "TheoryConstants":
        """Build the constants of a model pair, computing p by quadrature."""
        return cls(
            gamma1=model_x.evi(),
            gamma2=model_y.evi(),
            p=nontruncation_prob(model_x, model_y),
            rho1=rho1,
        )

    @property
    def alpha(self) -> float:
        return alpha(self.gamma1, self.gamma2)

    @property
    def gamma1_star(self) -> float:
        return observed_evi(self.gamma1, self.gamma2)

    @property
    def m(self) -> Optional[float]:
        if self.rho1 is None:
            return None
        return mean_shift(self.gamma1, self.rho1)

    @property
    def s2(self) -> float:
        return variance(self.p, self.gamma1, self.gamma2)

    def c(self, k: int) -> float:
        return c_k(self.gamma1, self.gamma2, k)

    def as_report(self) -> Dict[str, Optional[float]]:
        """Labeled values in report order."""
        return {
            "gamma1": self.gamma1,
            "gamma2": self.gamma2,
            "gamma1_star": self.gamma1_star,
            "p": self.p,
            "alpha": self.alpha,
            "rho1": self.rho1,
            "m": self.m,
            "s2": self.s2,
            "c_0": self.c(0),
            "c_1": self.c(1),
            "c_2": self.c(2),
        }
