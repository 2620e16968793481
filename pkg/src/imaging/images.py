"""
Image value types shared by every thresholding method.

Pixel arrays are stored row-major as (height, width) numpy arrays and are
made read-only on construction, so instances can be shared between workers.
"""

from dataclasses import dataclass
from typing import Iterable, Optional, Tuple

import numpy as np

from ..errors import BoundsError, GeometryError, InsufficientDataError

LEVELS = 256
MAX_LEVEL = LEVELS - 1


def _frozen(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


@dataclass(frozen=True)
class Region:
    """Axis-aligned rectangle in pixel coordinates (half-open on both axes)"""
    x: int
    y: int
    width: int
    height: int

    @property
    def x_stop(self) -> int:
        return self.x + self.width

    @property
    def y_stop(self) -> int:
        return self.y + self.height

    @property
    def area(self) -> int:
        return self.width * self.height

    def slices(self) -> Tuple[slice, slice]:
        return slice(self.y, self.y_stop), slice(self.x, self.x_stop)


@dataclass(frozen=True, eq=False)
class GrayImage:
    """8-bit gray image; height is 1 for a line-scan (linear) image"""
    pixels: np.ndarray

    def __post_init__(self) -> None:
        pixels = np.asarray(self.pixels)
        if pixels.ndim == 1:
            pixels = pixels.reshape(1, -1)
        if pixels.ndim != 2 or pixels.shape[0] < 1 or pixels.shape[1] < 1:
            raise GeometryError(f"Gray image needs width >= 1 and height >= 1, got shape {pixels.shape}")
        if pixels.dtype != np.uint8:
            if pixels.size and (pixels.min() < 0 or pixels.max() > MAX_LEVEL):
                raise BoundsError(f"Pixel values must lie in [0, {MAX_LEVEL}]")
            if np.issubdtype(pixels.dtype, np.floating) and not np.all(pixels == np.round(pixels)):
                raise GeometryError("Gray image pixels must be integer levels")
            pixels = pixels.astype(np.uint8)
        else:
            pixels = pixels.copy()
        object.__setattr__(self, "pixels", _frozen(pixels))

    @property
    def width(self) -> int:
        return int(self.pixels.shape[1])

    @property
    def height(self) -> int:
        return int(self.pixels.shape[0])

    @property
    def shape(self) -> Tuple[int, int]:
        return self.height, self.width

    @property
    def is_linear(self) -> bool:
        return self.height == 1

    def full_region(self) -> Region:
        return Region(0, 0, self.width, self.height)

    def contains(self, region: Region) -> bool:
        return (region.width >= 1 and region.height >= 1
                and region.x >= 0 and region.y >= 0
                and region.x_stop <= self.width and region.y_stop <= self.height)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, GrayImage):
            return NotImplemented
        return np.array_equal(self.pixels, other.pixels)


@dataclass(frozen=True, eq=False)
class BinaryImage:
    """Two-valued image g(x, y): 1 marks object pixels, 0 background"""
    pixels: np.ndarray

    def __post_init__(self) -> None:
        pixels = np.asarray(self.pixels)
        if pixels.ndim == 1:
            pixels = pixels.reshape(1, -1)
        if pixels.ndim != 2:
            raise GeometryError(f"Binary image must be two-dimensional, got shape {pixels.shape}")
        if pixels.size and not np.all((pixels == 0) | (pixels == 1)):
            raise BoundsError("Binary image pixels must be 0 or 1")
        object.__setattr__(self, "pixels", _frozen(pixels.astype(np.uint8)))

    @property
    def width(self) -> int:
        return int(self.pixels.shape[1])

    @property
    def height(self) -> int:
        return int(self.pixels.shape[0])

    @property
    def shape(self) -> Tuple[int, int]:
        return self.height, self.width

    def to_gray(self) -> GrayImage:
        """Map 1 -> 255 and 0 -> 0"""
        return GrayImage(self.pixels * np.uint8(MAX_LEVEL))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, BinaryImage):
            return NotImplemented
        return np.array_equal(self.pixels, other.pixels)


@dataclass(frozen=True, eq=False)
class ThresholdMap:
    """Per-pixel real-valued threshold surface T(x, y)"""
    values: np.ndarray

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim == 1:
            values = values.reshape(1, -1)
        if values.ndim != 2 or values.shape[0] < 1 or values.shape[1] < 1:
            raise GeometryError(f"Threshold map needs width >= 1 and height >= 1, got shape {values.shape}")
        if not np.all(np.isfinite(values)):
            raise BoundsError("Threshold map values must be finite")
        if values.min() < 0 or values.max() > MAX_LEVEL:
            raise BoundsError(f"Threshold map values must lie in [0, {MAX_LEVEL}]")
        object.__setattr__(self, "values", _frozen(values.copy()))

    @classmethod
    def constant(cls, width: int, height: int, threshold: float) -> "ThresholdMap":
        return cls(np.full((height, width), float(threshold)))

    @property
    def width(self) -> int:
        return int(self.values.shape[1])

    @property
    def height(self) -> int:
        return int(self.values.shape[0])

    @property
    def shape(self) -> Tuple[int, int]:
        return self.height, self.width

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ThresholdMap):
            return NotImplemented
        return np.array_equal(self.values, other.values)


@dataclass(frozen=True, eq=False)
class FrameStack:
    """
    L co-registered frames f_i(x, y), i in [0, L).

    frames has shape (L, height, width); acquisition_speed is the conveyor
    speed V in m/min the frames were captured at, when known.
    """
    frames: np.ndarray
    acquisition_speed: Optional[float] = None

    def __post_init__(self) -> None:
        frames = np.asarray(self.frames)
        if frames.ndim == 2:
            frames = frames.reshape(frames.shape[0], 1, frames.shape[1])
        if frames.ndim != 3:
            raise GeometryError(f"Frame stack must be (L, height, width), got shape {frames.shape}")
        if frames.shape[0] < 1:
            raise InsufficientDataError("Frame stack is empty")
        if frames.shape[1] < 1 or frames.shape[2] < 1:
            raise GeometryError(f"Frame geometry must be at least 1x1, got {frames.shape[2]}x{frames.shape[1]}")
        if frames.dtype != np.uint8:
            if frames.min() < 0 or frames.max() > MAX_LEVEL:
                raise BoundsError(f"Frame values must lie in [0, {MAX_LEVEL}]")
            if np.issubdtype(frames.dtype, np.floating) and not np.all(frames == np.round(frames)):
                raise GeometryError("Frame values must be integer levels")
            frames = frames.astype(np.uint8)
        else:
            frames = frames.copy()
        if self.acquisition_speed is not None and self.acquisition_speed <= 0:
            raise GeometryError(f"Acquisition speed must be positive, got {self.acquisition_speed}")
        object.__setattr__(self, "frames", _frozen(frames))

    @classmethod
    def from_images(cls, images: Iterable[GrayImage],
                    acquisition_speed: Optional[float] = None) -> "FrameStack":
        images = list(images)
        if not images:
            raise InsufficientDataError("Frame stack is empty")
        shape = images[0].shape
        for index, image in enumerate(images):
            if image.shape != shape:
                raise GeometryError(
                    f"Frame {index} is {image.width}x{image.height}, expected {shape[1]}x{shape[0]}"
                )
        return cls(np.stack([image.pixels for image in images]), acquisition_speed)

    @property
    def frame_count(self) -> int:
        return int(self.frames.shape[0])

    @property
    def width(self) -> int:
        return int(self.frames.shape[2])

    @property
    def height(self) -> int:
        return int(self.frames.shape[1])

    @property
    def shape(self) -> Tuple[int, int]:
        return self.height, self.width

    def frame(self, index: int) -> GrayImage:
        return GrayImage(self.frames[index])

    def series(self, x: int, y: int) -> np.ndarray:
        """Intensity history of one pixel across all frames"""
        if not (0 <= x < self.width and 0 <= y < self.height):
            raise BoundsError(f"Pixel ({x}, {y}) outside {self.width}x{self.height} frames")
        return self.frames[:, y, x]

    def crop(self, region: Region) -> "FrameStack":
        if not (region.x >= 0 and region.y >= 0 and region.x_stop <= self.width
                and region.y_stop <= self.height and region.area > 0):
            raise BoundsError(f"Region {region} outside {self.width}x{self.height} frames")
        rows, cols = region.slices()
        return FrameStack(self.frames[:, rows, cols], self.acquisition_speed)
