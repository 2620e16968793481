"""
Exception hierarchy for the binarization toolkit.

Every domain failure derives from BinarizationError so the CLI can map it
to exit code 1 in one place.
"""

from typing import Optional, Sequence


class BinarizationError(Exception):
    """Base exception for all domain errors"""
    pass


class BoundsError(BinarizationError):
    """A region or pixel coordinate lies outside the image"""
    pass


class GeometryError(BinarizationError):
    """Image, frame or map geometries do not agree"""
    pass


class InsufficientDataError(BinarizationError):
    """Not enough samples to build a statistic"""
    pass


class EmptyHistogramError(BinarizationError):
    """Histogram total is zero"""
    pass


class EmptyClassError(BinarizationError):
    """A bin range holds no mass"""
    pass


class NotBimodalError(BinarizationError):
    """The split-and-refit scheme could not separate two classes"""

    def __init__(self, message: str, last_split: Optional[float] = None):
        super().__init__(message)
        self.last_split = last_split


class NoValidThresholdError(BinarizationError):
    """The optimal-threshold equation has no root between the two means"""

    def __init__(self, message: str, roots: Sequence[float] = ()):
        super().__init__(message)
        self.roots = tuple(roots)


class InvalidRegionSizeError(BinarizationError):
    """Region dimensions are outside the accepted range"""
    pass


class NoValidRegionError(BinarizationError):
    """No region passed bimodal validation"""
    pass


class InsufficientFramesError(BinarizationError):
    """Frame stack is shorter than the calibration minimum"""
    pass


class InsufficientCalibrationError(BinarizationError):
    """Fewer than two speed calibration points"""
    pass


class MonotonicityError(BinarizationError):
    """Speed calibration thresholds rise with speed"""

    def __init__(self, message: str, rows: Sequence[int] = ()):
        super().__init__(message)
        self.rows = tuple(rows)


class TableCorruptionError(BinarizationError):
    """Speed table produced a nonpositive scaling ratio"""
    pass


class SpeedRangeError(BinarizationError):
    """Calibration speed missing or outside the table range"""
    pass


class IncompleteDataError(BinarizationError):
    """Calibration points lack the level columns"""
    pass


class ModelError(BinarizationError):
    """Invalid simulator scene model"""
    pass


class FormatError(BinarizationError):
    """Malformed or unsupported file content"""

    def __init__(self, message: str, offset: Optional[int] = None):
        if offset is not None:
            message = f"{message} (byte offset {offset})"
        super().__init__(message)
        self.offset = offset


class ManifestError(BinarizationError):
    """Stack manifest references a missing or inconsistent frame"""

    def __init__(self, message: str, frame: Optional[str] = None):
        super().__init__(message)
        self.frame = frame
