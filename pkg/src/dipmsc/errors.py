"""Exception types raised across the package."""


class DipmError(Exception):
    """Base class for all package errors."""


class ValidationError(DipmError, ValueError):
    """Input or configuration rejected before any computation."""


class ParseError(ValidationError):
    """Malformed rows or documents in an input file."""


class ShapeError(ValidationError):
    """Array shapes that do not line up."""


class DegenerateEntityError(ValidationError):
    """One or more entities have an all-zero dimension row.

    ``offenders`` lists ``(entity_id, dimension_name)`` pairs.
    """

    def __init__(self, offenders, message=None):
        self.offenders = list(offenders)
        self.entities = sorted({e for e, _ in self.offenders}, key=str)
        if message is None:
            pairs = ", ".join(f"{e!s}/{d!s}" for e, d in self.offenders)
            message = f"all-zero dimension rows for entities: {pairs}"
        super().__init__(message)


class WindowError(ValidationError):
    pass


class ShiftError(ValidationError):
    pass


class ConfigError(ValidationError):
    pass


class SpecError(ValidationError):
    """Synthetic generator parameters that cannot be realised."""


class SampleSizeError(ValidationError):
    pass


class EmptySampleError(ValidationError):
    pass


class DegenerateRowError(DipmError, ArithmeticError):
    """Every scanned shift leaves some dimension row without mass."""


class EmptyClusterError(DipmError):
    pass


class ConvergenceError(DipmError, ArithmeticError):
    pass


class SplitError(DipmError):
    pass


class NoEventsError(DipmError):
    """Fewer than two events could be extracted from a row."""


class DegenerateSampleError(DipmError, ArithmeticError):
    """Zero spread in an inter-event subsequence."""
