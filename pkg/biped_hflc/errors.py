"""Exception hierarchy for biped-hflc.

Every error carries the process exit code the CLI maps it to:
1 usage/validation, 2 I/O, 3 numerical failure.
"""

import copy


class HflcError(Exception):
    """Base exception for biped-hflc errors."""

    exit_code = 1

    def with_context(self, context: str) -> "HflcError":
        """Same error type with ``context`` prefixed to the message."""
        clone = copy.copy(self)
        clone.args = (f"{context}: {self}",)
        return clone


class InvalidArgumentError(HflcError, ValueError):
    """Raised when an operation receives an argument outside its domain."""
    pass


class ConfigError(HflcError):
    """Raised when a configuration file or value is invalid."""
    pass


class DatasetFormatError(HflcError):
    """Raised when a dataset CSV is malformed."""
    pass


class WiringError(HflcError):
    """Raised when controller signal wiring is inconsistent."""
    pass


class UnreachableError(HflcError):
    """Raised when an ankle target lies outside the leg's reach."""

    def __init__(self, distance: float, lower: float, upper: float):
        self.distance = distance
        self.lower = lower
        self.upper = upper
        super().__init__(
            f"Target unreachable: hip-ankle distance {distance:.12g} m "
            f"outside [{lower:.12g}, {upper:.12g}] m"
        )


class GenerationError(HflcError):
    """Raised when a gait configuration cannot be generated."""
    pass


class ModelFileError(HflcError):
    """Raised when a model file is missing required content or has the wrong schema."""
    pass


class PersistenceIOError(HflcError):
    """Raised when reading or writing an artifact fails at the OS level."""

    exit_code = 2


class NumericalError(HflcError):
    """Base class for numerical failures."""

    exit_code = 3


class DegenerateFiringError(NumericalError):
    """Raised when no rule fires (all firing strengths zero or non-finite)."""
    pass


class RankDeficiencyError(NumericalError):
    """Raised when an unregularized least-squares system is rank deficient."""
    pass


class DivergenceError(NumericalError):
    """Raised when training or the controller chain produces non-finite values."""
    pass
