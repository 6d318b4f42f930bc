"""Exception types raised across the package."""


class MosaiqError(Exception):
    """Base class for all package errors."""


class ShapeError(MosaiqError, ValueError):
    pass


class DimensionError(ShapeError):
    """Matrix is not square/symmetric where that is required."""


class NotPSDError(MosaiqError, ValueError):
    pass


class InsufficientSamplesError(MosaiqError, ValueError):
    pass


class FormatError(MosaiqError, ValueError):
    """File does not follow the expected binary layout (bad magic, header)."""


class TruncationError(FormatError):
    pass


class MismatchError(MosaiqError, ValueError):
    """Image and label files disagree on the record count."""


class DegenerateLossError(MosaiqError, ValueError):
    pass


class RangeError(MosaiqError, ValueError):
    pass


class NumericError(MosaiqError, ArithmeticError):
    """Training produced a non-finite loss."""


class CheckpointError(FormatError):
    pass
