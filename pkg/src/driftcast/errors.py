"""Exception types shared across the library."""


class DriftcastError(Exception):
    """Base class for all library errors."""


class InvalidInput(DriftcastError, ValueError):
    """An argument violates a precondition (shape, range, emptiness)."""


class NumericalFailure(DriftcastError, ArithmeticError):
    """An iterative numerical routine failed to converge."""


class DegenerateEmbedding(DriftcastError):
    """The embedding collapsed (e.g. all points identical in feature space)."""


class IngestError(DriftcastError):
    """A data file could not be parsed into a valid frame."""


class LoadError(DriftcastError):
    """A persisted model or report could not be restored."""
