"""Exception types raised across the package."""


class NetvulnError(Exception):
    """Base class for all package errors."""


class ParameterError(NetvulnError, ValueError):
    """A numeric argument lies outside its admissible range."""


class AffineRuleError(NetvulnError):
    pass


class GammaZeroError(ParameterError):
    pass


class GammaRangeError(ParameterError):
    pass


class EpsOutOfRange(ParameterError):
    pass


class POutOfRange(ParameterError):
    pass


class PZeroError(ParameterError):
    pass


class UnorderedRulesError(NetvulnError):
    pass


class TooFewAliveError(NetvulnError):
    pass


class DimensionMismatch(NetvulnError, ValueError):
    pass


class EmptyDegreeSequence(NetvulnError, ValueError):
    pass


class SubcriticalError(NetvulnError):
    """Damaged configuration model has no giant component for any p."""


class NumericalError(NetvulnError):
    """Base for failures of an iterative or quadrature routine."""


class NoConvergenceError(NumericalError):
    pass


class QuadratureTolError(NumericalError):
    pass


class InconclusiveError(NetvulnError):
    """Finite-size giant-component test could not classify a bracket midpoint.

    ``p_lo`` and ``p_hi`` hold the bracket reached before the failure.
    """

    def __init__(self, message, p_lo=None, p_hi=None):
        super().__init__(message)
        self.p_lo = p_lo
        self.p_hi = p_hi


class UndecidedError(NetvulnError):
    pass


class ConfigError(NetvulnError, ValueError):
    def __init__(self, field, message):
        super().__init__(f"{field}: {message}" if field else message)
        self.field = field
        self.message = message
