"""
Exception hierarchy for the truncated-evi toolkit.

Every exception carries a machine-readable ``code`` so that the command-line
front end can report failures as a single ``CODE: message`` line.
"""

from typing import Optional


class TailEstimationError(Exception):
    """Base class for all errors raised by the toolkit."""

    code = "E_TAIL"


class ModelDomainError(TailEstimationError, ValueError):
    """Raised for invalid model parameters, probabilities or model literals."""

    code = "E_MODEL"


class SampleValidationError(TailEstimationError):
    """Raised when an observed sample violates its invariants."""

    code = "E_SAMPLE"


class TruncationOrderError(SampleValidationError):
    """Raised when a pair violates x <= y."""

    code = "E_ORDER"

    def __init__(self, message: str, row: Optional[int] = None):
        super().__init__(message)
        self.row = row


class TiedObservationError(SampleValidationError):
    """Raised when two observed x values coincide."""

    code = "E_TIE"

    def __init__(self, message: str, value: Optional[float] = None):
        super().__init__(message)
        self.value = value


class EstimatorDomainError(TailEstimationError, ValueError):
    """Raised when an estimator is called outside its domain (k range, sign)."""

    code = "E_DOMAIN"


class DegenerateMassError(TailEstimationError):
    """
    Raised when the Lynden-Bell product collapses to zero.

    Attributes:
        degenerate_point: The largest observation T at which nC_n equals 1
    """

    code = "E_DEGENERATE"

    def __init__(self, message: str, degenerate_point: Optional[float] = None):
        super().__init__(message)
        self.degenerate_point = degenerate_point


class DegenerateThresholdError(DegenerateMassError):
    """Raised when the Lynden-Bell tail mass above the threshold is unusable."""

    code = "E_THRESHOLD"


class DegenerateCombinationError(TailEstimationError):
    """Raised when the two Hill estimates of the baseline coincide."""

    code = "E_COMBINATION"


class ExtrapolationOrderError(TailEstimationError):
    """Raised when the requested tail probability is not beyond the threshold."""

    code = "E_EXTRAPOLATION"


class TheoryDomainError(TailEstimationError, ValueError):
    """Raised when asymptotic constants are requested outside their validity range."""

    code = "E_THEORY"


class QuadratureError(TailEstimationError):
    """Raised when adaptive quadrature fails to converge."""

    code = "E_QUADRATURE"


class GenerationStallError(TailEstimationError):
    """Raised when rejection sampling exhausts its draw budget."""

    code = "E_STALL"


class ConfigError(TailEstimationError):
    """Raised when a run configuration is incomplete or carries unexpected keys."""

    code = "E_CONFIG"

    def __init__(self, message: str, key: Optional[str] = None):
        super().__init__(message)
        self.key = key


class DataFormatError(TailEstimationError):
    """Raised when a CSV file does not follow the expected layout."""

    code = "E_FORMAT"

    def __init__(self, message: str, line: Optional[int] = None):
        super().__init__(message)
        self.line = line
