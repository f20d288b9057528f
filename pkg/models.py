"""
Parametric Heavy-Tailed Distribution Models.

This module provides the Burr, Frechet and Pareto laws used both as data
generators for the Monte Carlo harness and as ground truth for the
estimators. Every model exposes its distribution function, survival function,
quantile and inverse survival functions in closed form, an inverse-transform
sampler and its true extreme value index.

Survival functions and inverse survival functions are evaluated directly (via
log1p/expm1) rather than through 1 - cdf, because all the estimators live in
the far tail where the subtraction cancels.

Model literals:
    burr(beta,tau,lambda)   F(x) = 1 - (beta / (beta + x^tau))^lambda, e.v.i. 1/(lambda tau)
    frechet(gamma)          F(x) = exp(-x^(-1/gamma)),                   e.v.i. gamma
    pareto(gamma,scale)     F(x) = 1 - (x/scale)^(-1/gamma), x >= scale, e.v.i. gamma

Usage:
    >>> from models import parse_model
    >>> model = parse_model("burr(10,4,1)")
    >>> model.evi()
    0.25
"""

import math
import re
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Any, Callable, Dict, Tuple, Union

import numpy as np

from errors import ModelDomainError

ArrayLike = Union[float, np.ndarray]

_LITERAL_PATTERN = re.compile(r"^\s*([a-z]+)\s*\((.*)\)\s*$")


def _finish(values: np.ndarray, scalar: bool) -> ArrayLike:
    """Return a Python float for scalar input, the array otherwise."""
    if scalar:
        return float(values)
    return values


def _format_number(value: float) -> str:
    if float(value).is_integer():
        return str(int(value))
    return repr(float(value))


def _check_positive(name: str, value: float) -> None:
    if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
        raise ModelDomainError(f"parameter {name} must be a positive finite number, got {value!r}")


class HeavyTailModel(ABC):
    """
    Abstract base class for heavy-tailed laws on the positive half-line.

    Concrete models implement the four closed-form functions (cdf, survival,
    quantile, isf) plus the extreme value index; sampling and literal
    rendering are shared.

    Models are immutable values and can be shared freely across threads and
    processes.
    """

    name: str = ""

    @abstractmethod
    def cdf(self, x: ArrayLike) -> ArrayLike:
        """
        Distribution function F(x).

        Args:
            x: Nonnegative point(s); points below the support map to 0

        Returns:
            F(x) in [0, 1], a float for scalar input
        """
        raise NotImplementedError

    @abstractmethod
    def survival(self, x: ArrayLike) -> ArrayLike:
        """Survival function 1 - F(x), computed without cancellation."""
        raise NotImplementedError

    @abstractmethod
    def _quantile(self, u: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    @abstractmethod
    def _isf(self, s: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    @abstractmethod
    def evi(self) -> float:
        """Return the true extreme value index (always > 0)."""
        raise NotImplementedError

    @abstractmethod
    def parameters(self) -> Tuple[float, ...]:
        """Return the positional parameters, in literal order."""
        raise NotImplementedError

    def lower_endpoint(self) -> float:
        """Return the lower endpoint of the support."""
        return 0.0

    def quantile(self, u: ArrayLike) -> ArrayLike:
        """
        Quantile function F^{-1}(u).

        Args:
            u: Probability level(s) in [0, 1)

        Returns:
            The quantile; u = 0 gives the lower endpoint

        Raises:
            ModelDomainError: If any u is outside [0, 1)
        """
        scalar = np.ndim(u) == 0
        values = np.asarray(u, dtype=float)
        if np.any(~(values >= 0.0)) or np.any(values >= 1.0):
            raise ModelDomainError(f"quantile level must lie in [0, 1), got {u!r}")
        with np.errstate(divide="ignore"):
            return _finish(self._quantile(values), scalar)

    def isf(self, s: ArrayLike) -> ArrayLike:
        """
        Inverse survival function: the x with survival(x) = s.

        Accurate for tiny s, which is where quantile(1 - s) loses digits.

        Args:
            s: Tail probability (or probabilities) in (0, 1]

        Raises:
            ModelDomainError: If any s is outside (0, 1]
        """
        scalar = np.ndim(s) == 0
        values = np.asarray(s, dtype=float)
        if np.any(~(values > 0.0)) or np.any(values > 1.0):
            raise ModelDomainError(f"tail probability must lie in (0, 1], got {s!r}")
        with np.errstate(divide="ignore"):
            return _finish(self._isf(values), scalar)

    def sample(self, rng: Any, count: int) -> np.ndarray:
        """
        Draw i.i.d. values by inverse-transform sampling.

        Args:
            rng: Random stream exposing ``random(size)`` (e.g. numpy Generator)
            count: Number of draws (>= 1)

        Returns:
            Array of ``count`` draws, quantile(U) with U uniform on [0, 1)
        """
        if int(count) < 1:
            raise ModelDomainError(f"sample count must be >= 1, got {count}")
        uniforms = np.asarray(rng.random(int(count)), dtype=float)
        with np.errstate(divide="ignore"):
            return self._quantile(uniforms)

    @property
    def literal(self) -> str:
        """The text literal of this model, e.g. ``burr(10,4,1)``."""
        params = ",".join(_format_number(p) for p in self.parameters())
        return f"{self.name}({params})"

    def __str__(self) -> str:
        return self.literal


@dataclass(frozen=True)
class Burr(HeavyTailModel):
    """
    Burr(beta, tau, lambda) law with F(x) = 1 - (beta / (beta + x^tau))^lambda.

    Attributes:
        beta: Scale-like parameter
        tau: Inner power
        lam: Outer power (lambda)
    """

    beta: float
    tau: float
    lam: float

    name = "burr"

    def __post_init__(self) -> None:
        _check_positive("beta", self.beta)
        _check_positive("tau", self.tau)
        _check_positive("lambda", self.lam)

    def _log_survival(self, x: np.ndarray) -> np.ndarray:
        x = np.maximum(x, 0.0)
        return -self.lam * np.log1p(x ** self.tau / self.beta)

    def cdf(self, x: ArrayLike) -> ArrayLike:
        scalar = np.ndim(x) == 0
        return _finish(-np.expm1(self._log_survival(np.asarray(x, dtype=float))), scalar)

    def survival(self, x: ArrayLike) -> ArrayLike:
        scalar = np.ndim(x) == 0
        return _finish(np.exp(self._log_survival(np.asarray(x, dtype=float))), scalar)

    def _quantile(self, u: np.ndarray) -> np.ndarray:
        return (self.beta * np.expm1(-np.log1p(-u) / self.lam)) ** (1.0 / self.tau)

    def _isf(self, s: np.ndarray) -> np.ndarray:
        return (self.beta * np.expm1(-np.log(s) / self.lam)) ** (1.0 / self.tau)

    def evi(self) -> float:
        return 1.0 / (self.lam * self.tau)

    def parameters(self) -> Tuple[float, ...]:
        return (self.beta, self.tau, self.lam)


@dataclass(frozen=True)
class Frechet(HeavyTailModel):
    """
    Frechet(gamma) law with F(x) = exp(-x^(-1/gamma)).

    Attributes:
        gamma: Extreme value index
    """

    gamma: float

    name = "frechet"

    def __post_init__(self) -> None:
        _check_positive("gamma", self.gamma)

    def _power(self, x: np.ndarray) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return np.maximum(x, 0.0) ** (-1.0 / self.gamma)

    def cdf(self, x: ArrayLike) -> ArrayLike:
        scalar = np.ndim(x) == 0
        return _finish(np.exp(-self._power(np.asarray(x, dtype=float))), scalar)

    def survival(self, x: ArrayLike) -> ArrayLike:
        scalar = np.ndim(x) == 0
        return _finish(-np.expm1(-self._power(np.asarray(x, dtype=float))), scalar)

    def _quantile(self, u: np.ndarray) -> np.ndarray:
        return (-np.log(u)) ** (-self.gamma)

    def _isf(self, s: np.ndarray) -> np.ndarray:
        return (-np.log1p(-s)) ** (-self.gamma)

    def evi(self) -> float:
        return self.gamma

    def parameters(self) -> Tuple[float, ...]:
        return (self.gamma,)


@dataclass(frozen=True)
class Pareto(HeavyTailModel):
    """
    Pareto(gamma, scale) law with survival (x/scale)^(-1/gamma) above scale.

    The tail is exactly a power function, so tail integrals have closed forms
    without second-order terms.

    Attributes:
        gamma: Extreme value index
        scale: Lower endpoint of the support
    """

    gamma: float
    scale: float = 1.0

    name = "pareto"

    def __post_init__(self) -> None:
        _check_positive("gamma", self.gamma)
        _check_positive("scale", self.scale)

    def _log_ratio(self, x: np.ndarray) -> np.ndarray:
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.log(np.maximum(x, self.scale) / self.scale)

    def cdf(self, x: ArrayLike) -> ArrayLike:
        scalar = np.ndim(x) == 0
        return _finish(-np.expm1(-self._log_ratio(np.asarray(x, dtype=float)) / self.gamma), scalar)

    def survival(self, x: ArrayLike) -> ArrayLike:
        scalar = np.ndim(x) == 0
        return _finish(np.exp(-self._log_ratio(np.asarray(x, dtype=float)) / self.gamma), scalar)

    def _quantile(self, u: np.ndarray) -> np.ndarray:
        return self.scale * np.exp(-self.gamma * np.log1p(-u))

    def _isf(self, s: np.ndarray) -> np.ndarray:
        return self.scale * s ** (-self.gamma)

    def evi(self) -> float:
        return self.gamma

    def lower_endpoint(self) -> float:
        return self.scale

    def parameters(self) -> Tuple[float, ...]:
        return (self.gamma, self.scale)


MODEL_REGISTRY: Dict[str, Tuple[Callable[..., HeavyTailModel], Tuple[int, ...]]] = {
    "burr": (Burr, (3,)),
    "frechet": (Frechet, (1,)),
    "pareto": (Pareto, (1, 2)),
}


def parse_model(text: str) -> HeavyTailModel:
    """
    Parse a model literal such as ``burr(10,4,1)``, ``frechet(0.25)`` or ``pareto(0.5,1)``.

    Args:
        text: Lowercase model name followed by comma-separated positional parameters

    Returns:
        The corresponding model

    Raises:
        ModelDomainError: If the literal is malformed or the parameters are invalid
    """
    match = _LITERAL_PATTERN.match(text or "")
    if match is None:
        raise ModelDomainError(f"malformed model literal {text!r}; expected e.g. burr(10,4,1)")
    name, raw_params = match.group(1), match.group(2)
    if name not in MODEL_REGISTRY:
        known = ", ".join(sorted(MODEL_REGISTRY))
        raise ModelDomainError(f"unknown model {name!r} in {text!r}; known models: {known}")

    factory, arities = MODEL_REGISTRY[name]
    pieces = [piece.strip() for piece in raw_params.split(",")] if raw_params.strip() else []
    if len(pieces) not in arities:
        expected = " or ".join(str(a) for a in arities)
        raise ModelDomainError(f"{name} takes {expected} parameter(s), got {len(pieces)} in {text!r}")
    try:
        params = [float(piece) for piece in pieces]
    except ValueError as e:
        raise ModelDomainError(f"non-numeric parameter in {text!r}") from e
    return factory(*params)
