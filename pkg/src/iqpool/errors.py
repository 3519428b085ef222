"""Exception types shared across the package."""


class IQPoolError(Exception):
    """Base class for all errors raised by this package."""


class InvalidImage(IQPoolError):
    """Image buffer is empty or malformed."""


class ShapeMismatch(IQPoolError):
    """Two arrays that must share dimensions do not."""


class WindowTooLarge(IQPoolError):
    """Sliding window does not fit inside the image."""


class InvalidParameter(IQPoolError):
    """Parameter outside its documented domain."""


class EmptyMap(IQPoolError):
    """Pooling requested on a map with no entries."""


class DegenerateWeights(IQPoolError):
    """External weight map sums to zero; weighted mean is undefined."""


class FitDegenerate(IQPoolError):
    """Regression input is constant; no curve can be fitted."""


class UndefinedCorrelation(IQPoolError):
    """Correlation undefined (constant input or too few samples)."""


class InvalidSampleSize(IQPoolError):
    """Significance test needs at least 4 samples per correlation."""


class InvalidCodeword(IQPoolError):
    """Significance codeword must hold exactly 9 binary flags."""


class ManifestSchemaError(IQPoolError):
    """Dataset manifest is missing required columns."""


class RecordError(IQPoolError):
    """A manifest row failed validation."""

    def __init__(self, message: str, row: int):
        super().__init__(f"row {row}: {message}")
        self.row = row


class DecodeError(IQPoolError):
    """Image file exists but cannot be decoded."""
