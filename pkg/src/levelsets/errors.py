"""Exception hierarchy shared by all levelsets modules.

The CLI maps these onto exit codes: configuration problems exit 2,
hypothesis-gate failures exit 3, I/O failures (plain OSError) exit 4.
"""


class LevelSetsError(Exception):
    """Base class for all errors raised by this package."""


class ParameterError(LevelSetsError, ValueError):
    """An argument violates an operation's contract (domain, shape, range)."""


class DomainError(ParameterError):
    """A point lies outside the nonnegative orthant the models are defined on."""


class GridMismatchError(ParameterError):
    """Two grid-indexed objects were combined but live on different grids."""


class EmptySetError(ParameterError):
    """A set-distance was requested for an empty point set."""


class ConfigurationError(LevelSetsError):
    """A config file or run configuration is invalid (unknown key, bad value,
    empty scan tube)."""


class HypothesisGateError(LevelSetsError):
    """The regularity gate failed: vanishing gradient infimum over the tube,
    non-finite Hessian bound, or the level curve does not cross the box.
    Gradient-based bounds are refused in this state."""
