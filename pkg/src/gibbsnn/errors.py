"""Exception types shared across the package."""


class GibbsnnError(Exception):
    """Base class for package errors."""


class ShapeError(GibbsnnError):
    """Layer shapes do not compose, or an input has the wrong shape."""


class NumericalError(GibbsnnError):
    """A non-finite value appeared where finite math was required."""


class ConfigError(GibbsnnError):
    """A run configuration document failed validation."""


class FormatError(GibbsnnError):
    """A dataset file does not match its declared binary/text format."""


class BadMagicError(FormatError):
    """File header magic number is wrong."""


class TruncatedError(FormatError):
    """File ends before its declared payload does."""


class CountMismatchError(FormatError):
    """Image and label files disagree on the number of samples."""
