"""Exception types shared across the package.

Every failure mode the library reports deliberately maps onto one of these,
so callers (and the CLI exit-code contract) can branch on class rather than
on message text.
"""


class LoopInfoError(Exception):
    """Base class for all loopinfo errors."""


class InvalidInputError(LoopInfoError, ValueError):
    """Malformed or out-of-contract input (bad coefficients, mismatched grids, ...)."""


class SingularityError(LoopInfoError):
    """A transfer function or shaping filter is singular on the unit circle."""

    def __init__(self, message, omega=None):
        super().__init__(message)
        self.omega = omega


class DegenerateLoopError(LoopInfoError):
    """The return difference 1 - L is identically zero; the loop has no solution."""


class UnstableLoopError(LoopInfoError):
    """The closed loop is not (internally) stable.

    Carries the offending pole locations when known.
    """

    def __init__(self, message, poles=()):
        poles = tuple(poles)
        if poles:
            listed = ", ".join(f"{p:.6g}" for p in poles)
            message = f"{message} (offending poles: {listed})"
        super().__init__(message)
        self.poles = poles


class DivergenceError(LoopInfoError):
    """A simulated sample exceeded the blow-up guard (non-stabilizing loop or numerics)."""

    def __init__(self, message, index=None, value=None):
        super().__init__(message)
        self.index = index
        self.value = value


class LogDomainError(LoopInfoError):
    """A log integrand sample was nonpositive. Carries the frequency and value."""

    def __init__(self, message, omega=None, value=None):
        super().__init__(message)
        self.omega = omega
        self.value = value


class DivisionDomainError(LoopInfoError):
    """A spectral ratio denominator vanished. Carries the frequency."""

    def __init__(self, message, omega=None):
        super().__init__(message)
        self.omega = omega


class ConsistencyError(LoopInfoError):
    """Two internally redundant computations of the same quantity disagreed."""


class ConfigError(InvalidInputError):
    """A config file failed to parse. Carries the offending field path."""

    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field
