"""Exception types raised by povm_duel."""


class PovmDuelError(Exception):
    """Base class for all library errors."""


class ShapeError(PovmDuelError, ValueError):
    """Raised when matrix or vector dimensions do not conform."""


class ToleranceError(PovmDuelError, ValueError):
    """Raised when an input violates a numerical precondition (Hermiticity,
    unitarity, positivity, normalisation) beyond the accepted tolerance."""


class SubsetCapError(PovmDuelError, ValueError):
    """Raised when an exhaustive subset scan would exceed the configured cap."""


class MatrixFileError(PovmDuelError, ValueError):
    """Raised for malformed matrix/report files.

    ``location`` names the offending place (``line 3, column 7`` or a field
    path such as ``entries[1][0]``).
    """

    def __init__(self, message, location=None):
        self.location = location
        if location is not None:
            message = f"{location}: {message}"
        super().__init__(message)
