"""
256-bin intensity histograms.

Histograms keep raw counts; normalization is derived on demand so temporal
histograms built from different frame counts stay comparable. Bin centers
are the integer levels 0..255 themselves.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..errors import BoundsError, EmptyClassError, EmptyHistogramError, InsufficientDataError
from .images import LEVELS, MAX_LEVEL, FrameStack, GrayImage, Region

LEVEL_VALUES = np.arange(LEVELS, dtype=np.float64)
LEVEL_VALUES.setflags(write=False)


@dataclass(frozen=True, eq=False)
class Histogram:
    """Raw counts over the 256 intensity levels"""
    counts: np.ndarray

    def __post_init__(self) -> None:
        counts = np.asarray(self.counts)
        if counts.shape != (LEVELS,):
            raise BoundsError(f"Histogram needs exactly {LEVELS} bins, got shape {counts.shape}")
        if np.any(counts < 0):
            raise BoundsError("Histogram counts must be nonnegative")
        counts = counts.astype(np.int64)
        counts.setflags(write=False)
        object.__setattr__(self, "counts", counts)

    @classmethod
    def from_samples(cls, samples: np.ndarray) -> "Histogram":
        samples = np.asarray(samples).ravel()
        if samples.size and (samples.min() < 0 or samples.max() > MAX_LEVEL):
            raise BoundsError(f"Samples must lie in [0, {MAX_LEVEL}]")
        return cls(np.bincount(samples.astype(np.int64), minlength=LEVELS))

    @classmethod
    def from_bins(cls, bins: dict) -> "Histogram":
        """Build from a sparse {level: count} mapping"""
        counts = np.zeros(LEVELS, dtype=np.int64)
        for level, count in bins.items():
            if not 0 <= level <= MAX_LEVEL:
                raise BoundsError(f"Histogram level {level} outside [0, {MAX_LEVEL}]")
            counts[level] = count
        return cls(counts)

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    @property
    def occupied_bins(self) -> int:
        return int(np.count_nonzero(self.counts))

    def __add__(self, other: "Histogram") -> "Histogram":
        return Histogram(self.counts + other.counts)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Histogram):
            return NotImplemented
        return np.array_equal(self.counts, other.counts)


@dataclass(frozen=True)
class ClassMoments:
    """Weighted moments of one bin range: mean, population variance, mass fraction"""
    mean: float
    variance: float
    mass: float


def build_spatial(image: GrayImage, region: Optional[Region] = None) -> Histogram:
    """Histogram of an image, or of a rectangle inside it"""
    if region is None:
        region = image.full_region()
    if not image.contains(region):
        raise BoundsError(f"Region {region} outside {image.width}x{image.height} image")
    rows, cols = region.slices()
    return Histogram.from_samples(image.pixels[rows, cols])


def build_temporal(stack: FrameStack, x: int, y: int) -> Histogram:
    """Temporal histogram of pixel (x, y) over every frame of the stack"""
    if stack.frame_count < 1:
        raise InsufficientDataError("Frame stack is empty")
    return Histogram.from_samples(stack.series(x, y))


def normalize(histogram: Histogram) -> np.ndarray:
    """h(x_i) = counts[i] / total"""
    total = histogram.total
    if total == 0:
        raise EmptyHistogramError("Cannot normalize an empty histogram")
    return histogram.counts / float(total)


def mean_and_variance(histogram: Histogram, low: int = 0, high: int = MAX_LEVEL) -> ClassMoments:
    """
    Moments of the bins in [low, high] (inclusive).

    Variance divides by the class mass, not mass - 1.
    """
    if not (0 <= low <= high <= MAX_LEVEL):
        raise BoundsError(f"Bin range [{low}, {high}] outside [0, {MAX_LEVEL}]")
    total = histogram.total
    if total == 0:
        raise EmptyHistogramError("Histogram is empty")
    weights = histogram.counts[low:high + 1]
    class_count = int(weights.sum())
    if class_count == 0:
        raise EmptyClassError(f"No mass in bins [{low}, {high}]")
    levels = LEVEL_VALUES[low:high + 1]
    mean = float(np.dot(weights, levels) / class_count)
    variance = float(np.dot(weights, (levels - mean) ** 2) / class_count)
    return ClassMoments(mean=mean, variance=max(variance, 0.0), mass=class_count / total)
