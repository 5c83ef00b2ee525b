"""Exception hierarchy shared across the package."""


class SteerboxError(Exception):
    """Base class for all package errors."""


class BoxValidationError(SteerboxError):
    """A probability table violates normalization or nonnegativity."""


class SignalingBoxError(SteerboxError):
    """A box's marginals depend on the remote party's input."""


class NonlocalBoxError(SteerboxError):
    """An operation defined only for local boxes received a nonlocal one."""


class NonRationalBoxError(SteerboxError):
    """An exact-arithmetic operation received a floating-point box."""


class InvalidStateError(SteerboxError):
    """A matrix fails the density-matrix invariants."""


class InvalidAssemblageError(SteerboxError):
    """Conditional operators fail positivity or consistency."""


class RangeError(SteerboxError, ValueError):
    """A numeric argument is outside its documented range."""


class ConfigError(SteerboxError, ValueError):
    """A solver or CLI configuration value is invalid."""
