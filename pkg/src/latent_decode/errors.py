"""Exception hierarchy.

Every validation or numerical failure raised by the library derives from
:class:`LatentDecodeError`, which is itself a :class:`ValueError`. Missing
files surface as the builtin :class:`FileNotFoundError`.
"""


class LatentDecodeError(ValueError):
    """Base class for all library errors."""


class FormatError(LatentDecodeError):
    pass


class NonFiniteValue(LatentDecodeError):
    pass


class ShapeMismatch(LatentDecodeError):
    pass


class SingularSystem(LatentDecodeError):
    pass


class TooFewRows(LatentDecodeError):
    pass


class ZeroVariance(LatentDecodeError):
    def __init__(self, message, row=None):
        super().__init__(message)
        self.row = row


class LengthMismatch(LatentDecodeError):
    pass


class KTooLarge(LatentDecodeError):
    pass


class DegenerateData(LatentDecodeError):
    pass


class MixedDimensions(LatentDecodeError):
    pass


class UnsupportedFormat(LatentDecodeError):
    pass


class EmptyDirectory(LatentDecodeError):
    pass


class GeometryMismatch(LatentDecodeError):
    pass


class DuplicateIndex(LatentDecodeError):
    pass


class IndexOutOfRange(LatentDecodeError):
    pass


class EmptyMask(LatentDecodeError):
    pass


class EmptyInput(LatentDecodeError):
    pass


class ConfigInvalid(LatentDecodeError):
    pass


class DecodeWarning(UserWarning):
    """Numerical degradation that did not stop a computation (jitter, constant columns)."""
