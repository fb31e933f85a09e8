from typing import Dict, Optional


class MubsepError(ValueError):
    """Base class for every error raised by mubsep."""


class ShapeError(MubsepError):
    pass


class NotHermitianError(MubsepError):
    pass


class InvalidStateError(MubsepError):
    """A matrix failed one or more density-matrix invariants.

    `failures` maps the invariant name (hermiticity, trace, positivity, shape)
    to the measured residual.
    """

    def __init__(self, failures: Dict[str, float], message: Optional[str] = None):
        self.failures = dict(failures)
        if message is None:
            parts = [f"{k}={v:.3e}" for k, v in self.failures.items()]
            message = "invalid density matrix: " + " ".join(parts)
        super().__init__(message)


class UnsupportedDimensionError(MubsepError):
    pass


class PositivityError(MubsepError):
    pass


class PartitionError(MubsepError):
    pass


class SelectionError(MubsepError):
    pass


class SearchCapError(MubsepError):
    pass


class FamilyMismatchError(MubsepError):
    pass


class DocumentError(MubsepError):
    pass
