from typing import Optional, Sequence


class HillspecError(Exception):
    """Base class for every error raised by hillspec"""


# Input and domain errors
class DomainError(HillspecError, ValueError):
    """An argument lies outside the domain of an operation"""


class PotentialError(DomainError):
    """Invalid potential parameters"""


class OperatorError(DomainError):
    """Invalid operator order or truncation window"""


class RegionError(DomainError):
    """A complex-plane region violates its defining constraints"""


class WindowError(DomainError):
    """A check was requested beyond the reliable part of the truncation window"""


# Configuration and files
class ConfigError(HillspecError):
    """Experiment configuration could not be parsed or validated"""


class PotentialFileError(ConfigError):
    """Malformed coefficient CSV"""


# Numerical failures
class NumericalError(HillspecError):
    """A numerical stage failed; carries enough state to diagnose it"""


class EigensolverError(NumericalError):
    def __init__(self, message: str, size: int, K: Optional[int] = None,
                 partial: Optional[Sequence[complex]] = None):
        super().__init__(message)
        self.size = size
        self.K = K
        self.partial = list(partial) if partial is not None else []


class PoleError(NumericalError):
    """lambda lies on spec(D_m)"""

    def __init__(self, message: str, lam: complex, k: int):
        super().__init__(message)
        self.lam = lam
        self.k = k


class PoleProximityError(NumericalError):
    def __init__(self, message: str, lam: complex, condition: float):
        super().__init__(message)
        self.lam = lam
        self.condition = condition


class NeumannDivergenceError(NumericalError):
    def __init__(self, message: str, rho: float):
        super().__init__(message)
        self.rho = rho


class ContourError(NumericalError):
    """An eigenvalue sits on (or too close to) the integration contour"""

    def __init__(self, message: str, eigenvalue: complex, distance: float):
        super().__init__(message)
        self.eigenvalue = eigenvalue
        self.distance = distance


class QuadratureError(NumericalError):
    """Contour trace is not close enough to an integer; raise node_count"""

    def __init__(self, message: str, trace: complex):
        super().__init__(message)
        self.trace = trace


class HomotopyError(NumericalError):
    def __init__(self, message: str, s: float, cause: Exception):
        super().__init__(message)
        self.s = s
        self.cause = cause
