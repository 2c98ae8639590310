"""Exception hierarchy shared by all trackseg modules."""


class TrackSegError(Exception):
    """Base class for all errors raised by this package."""


class PadTooLarge(TrackSegError):
    """Requested mirror padding exceeds the shortest image side."""


class CropTooLarge(TrackSegError):
    """Requested crop would leave no pixels."""


class ImageIOError(TrackSegError):
    """An image file could not be read or written."""


class UnsupportedFormat(TrackSegError):
    """File format or pixel layout outside the supported set."""


class CorruptFile(TrackSegError):
    """File exists but does not decode as a valid image."""


class InvalidLevel(TrackSegError):
    """Decomposition level outside the valid range."""


class ImageTooSmall(TrackSegError):
    """Image too small for the requested filter or decomposition depth."""


class TooFewLevels(TrackSegError):
    """Decomposition does not carry enough detail planes."""


class DimensionMismatch(TrackSegError):
    """Two images that must share dimensions do not."""


class EmptyInput(TrackSegError):
    """An operation received no data to work on."""
