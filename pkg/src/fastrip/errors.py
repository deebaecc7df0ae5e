"""Exception hierarchy.

Errors are split in two families so the CLI can map them onto exit codes:
``ConfigError`` (bad input, exit 2) and ``NumericalError`` (a computation
failed on valid input, exit 3).
"""


class FastRipError(Exception):
    """Base class for every error raised by this package."""


class ConfigError(FastRipError, ValueError):
    pass


class NumericalError(FastRipError, ArithmeticError):
    pass


class LengthMismatch(ConfigError):
    pass


class NotPowerOfTwo(ConfigError):
    pass


class FieldMismatch(ConfigError):
    pass


class SizeGuard(ConfigError):
    pass


class BadSupport(ConfigError):
    pass


class KappaTooLarge(ConfigError):
    def __init__(self, kappa, message=None):
        self.kappa = kappa
        super().__init__(message or f"kappa = {kappa:.6g} >= 1/2; construction refused")


class RegimeViolation(ConfigError):
    pass


class TooManySupports(ConfigError):
    pass


class DegenerateInput(ConfigError):
    pass


class NotUnitNorm(ConfigError):
    pass


class ConfigParse(ConfigError):
    pass


class BaseNotScaledOrthonormal(NumericalError):
    def __init__(self, deviation, message=None):
        self.deviation = deviation
        super().__init__(
            message or f"base * base^* deviates from (n/k) Id by {deviation:.3e}"
        )


class NoConvergence(NumericalError):
    pass


class SingularSubproblem(NumericalError):
    pass


class BudgetExhaustedBeforeAnyPoint(NumericalError):
    pass
