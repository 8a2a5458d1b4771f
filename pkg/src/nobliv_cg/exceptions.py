"""Exception hierarchy shared across the package."""


class InvalidParameterError(ValueError):
    """A constructor or operation received an out-of-range parameter."""


class InvalidProfileError(InvalidParameterError):
    """A smoothness profile has a non-positive constant."""


class DimensionMismatchError(ValueError):
    """Vector dimensions disagree with the problem dimension."""


class InfeasibleShrinkError(ValueError):
    """The current iterate exceeds the upper bound used to shrink a region."""


class UnsupportedOperationError(NotImplementedError):
    """The objective or region does not provide the requested oracle."""


class EmptyBatchError(ValueError):
    pass


class SizeLimitError(ValueError):
    """Exhaustive enumeration was requested on too large a ground set."""


class InvariantViolation(RuntimeError):
    """A solver invariant (feasibility, trajectory bound) was broken."""


class ConfigError(ValueError):
    pass
