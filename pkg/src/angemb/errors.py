"""Exception hierarchy.

Two broad families so the CLI can map failures to stable exit codes:
``DataError`` for malformed or unusable input (exit 3) and ``NumericError``
for fits that cannot complete under their contract (exit 4).
"""


class AngembError(Exception):
    """Base class for all package errors."""


class DataError(AngembError):
    """Input data is malformed, inconsistent, or unreadable."""


class NumericError(AngembError):
    """A numeric routine could not satisfy its contract."""


class InvalidData(DataError):
    """Non-finite entries, shape mismatches, or unparseable input."""


class MixedDimensions(DataError):
    """Frames in one stack do not share width/height."""


class UnsupportedFormat(DataError):
    """Image file is not binary 8-bit grayscale PGM (P5)."""


class EmptyInput(DataError):
    """No input items were provided."""


class InvalidRank(NumericError):
    """Requested component count is outside the feasible range."""


class RankDeficient(NumericError):
    """Gram-side decomposition found fewer usable directions than requested."""


class EmptyAfterNormalization(NumericError):
    """Every column had (near-)zero norm; nothing left to fit."""


class InvalidThreshold(NumericError):
    """Angular threshold outside the open interval (0, pi/2)."""


class SingularStep(NumericError):
    """EM update hit a singular inner system twice in a row."""
