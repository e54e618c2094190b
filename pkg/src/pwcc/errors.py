"""Exception types raised across the package."""


class PWCCError(Exception):
    """Base class for every error raised by pwcc."""


class InvalidInputError(PWCCError, ValueError):
    """Image or map content is not acceptable (non-finite values, zero vectors)."""


class InvalidArgumentError(PWCCError, ValueError):
    """A scalar argument is outside its allowed range."""


class ShapeError(PWCCError, ValueError):
    """Array dimensions do not agree."""


class ConfigError(PWCCError, ValueError):
    """A configuration document or option is unusable."""


class EstimationError(PWCCError, ValueError):
    """A baseline estimator cannot produce an illuminant for this image."""


class DivergenceError(PWCCError, RuntimeError):
    """Training produced a non-finite loss."""

    def __init__(self, epoch, batch, value):
        super().__init__(f"non-finite loss {value!r} at epoch {epoch}, batch {batch}")
        self.epoch = epoch
        self.batch = batch


class FormatError(PWCCError, ValueError):
    """A binary file does not follow its declared layout."""


class BadMagicError(FormatError):
    pass


class TruncatedFileError(FormatError):
    pass


class ChannelCountError(FormatError):
    pass


class UnsupportedVersionError(FormatError):
    pass


class MalformedPNGError(FormatError):
    pass


class UnsupportedBitDepthError(FormatError):
    pass


class CacheMismatchError(PWCCError, RuntimeError):
    """A forward cache was handed to backward with parameters it was not built from."""
