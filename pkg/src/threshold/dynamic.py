"""
Dynamic thresholding: per-region validated thresholds interpolated into a
per-pixel threshold surface T(x, y).

Steps:
  1. partition the image into regions of a prescribed size
  2. fit and validate each region histogram; valid regions get their
     optimal threshold, the rest stay pending
  3. fill pending regions from their 8-neighbourhood (inverse-distance
     weights over region centers), wave by wave
  4. bilinear interpolation between region centers for every pixel
"""

import logging
import math
from dataclasses import dataclass, replace
from enum import Enum
from typing import Dict, List, Optional, Tuple

import numpy as np

from ..errors import InvalidRegionSizeError, NoValidRegionError
from ..imaging.histogram import Histogram, build_spatial
from ..imaging.images import MAX_LEVEL, BinaryImage, GrayImage, Region, ThresholdMap
from .global_threshold import binarize_with_map, solve_optimal
from .mixture import DEFAULT_TOLERANCE, validate_bimodal

logger = logging.getLogger(__name__)

MIN_REGION_SIZE = 8
DEFAULT_REGION_SIZE = (64, 64)
DEFAULT_LINEAR_REGION_WIDTH = 128

NEIGHBOUR_OFFSETS = [(dr, dc) for dr in (-1, 0, 1) for dc in (-1, 0, 1) if (dr, dc) != (0, 0)]


class RegionStatus(Enum):
    VALID = "valid"
    PENDING = "pending"
    INTERPOLATED = "interpolated"


@dataclass(frozen=True)
class RegionRecord:
    region: Region
    histogram: Histogram
    status: RegionStatus = RegionStatus.PENDING
    threshold: Optional[float] = None
    fit_error: Optional[float] = None

    @property
    def center(self) -> Tuple[float, float]:
        return (self.region.x + (self.region.width - 1) / 2.0,
                self.region.y + (self.region.height - 1) / 2.0)


@dataclass(frozen=True)
class RegionGrid:
    """Regions in row-major order; records[row][col]"""
    image_width: int
    image_height: int
    region_width: int
    region_height: int
    records: Tuple[Tuple[RegionRecord, ...], ...]

    @property
    def rows(self) -> int:
        return len(self.records)

    @property
    def cols(self) -> int:
        return len(self.records[0])

    def record(self, row: int, col: int) -> RegionRecord:
        return self.records[row][col]

    def statuses(self) -> List[List[RegionStatus]]:
        return [[record.status for record in row] for row in self.records]

    def thresholds(self) -> np.ndarray:
        """(rows, cols) thresholds, NaN where still pending"""
        return np.array(
            [[np.nan if record.threshold is None else record.threshold for record in row]
             for row in self.records],
            dtype=np.float64,
        )

    def fit_errors(self) -> np.ndarray:
        """(rows, cols) histogram fit errors M, NaN where no mixture could be fitted"""
        return np.array(
            [[np.nan if record.fit_error is None else record.fit_error for record in row]
             for row in self.records],
            dtype=np.float64,
        )

    def column_centers(self) -> np.ndarray:
        return np.array([record.center[0] for record in self.records[0]])

    def row_centers(self) -> np.ndarray:
        return np.array([row[0].center[1] for row in self.records])

    def count(self, status: RegionStatus) -> int:
        return sum(record.status is status for row in self.records for record in row)


def default_region_size(image: GrayImage, area_size: Tuple[int, int] = DEFAULT_REGION_SIZE,
                        linear_width: int = DEFAULT_LINEAR_REGION_WIDTH) -> Tuple[int, int]:
    """Configured region size, clipped to the image; linear images use width x 1 strips"""
    if image.is_linear:
        return min(linear_width, image.width), 1
    return min(area_size[0], image.width), min(area_size[1], image.height)


def partition(image: GrayImage, region_width: int, region_height: int) -> RegionGrid:
    """Tile the image; edge regions are clipped to the image"""
    min_width = min(MIN_REGION_SIZE, image.width)
    min_height = min(MIN_REGION_SIZE, image.height)
    if not (min_width <= region_width <= image.width and min_height <= region_height <= image.height):
        raise InvalidRegionSizeError(
            f"Region {region_width}x{region_height} invalid for {image.width}x{image.height} image "
            f"(minimum {min_width}x{min_height})"
        )

    cols = math.ceil(image.width / region_width)
    rows = math.ceil(image.height / region_height)
    records = []
    for row in range(rows):
        y = row * region_height
        height = min(region_height, image.height - y)
        row_records = []
        for col in range(cols):
            x = col * region_width
            region = Region(x, y, min(region_width, image.width - x), height)
            row_records.append(RegionRecord(region=region, histogram=build_spatial(image, region)))
        records.append(tuple(row_records))

    logger.debug(f"Partitioned {image.width}x{image.height} image into {cols}x{rows} regions")
    return RegionGrid(image.width, image.height, region_width, region_height, tuple(records))


def estimate_region_thresholds(grid: RegionGrid, tolerance: float = DEFAULT_TOLERANCE) -> RegionGrid:
    """Validate every region independently; accepted regions get their optimal threshold"""
    records = []
    for row in grid.records:
        row_records = []
        for record in row:
            validation = validate_bimodal(record.histogram, tolerance)
            if validation.accepted:
                record = replace(
                    record,
                    status=RegionStatus.VALID,
                    threshold=solve_optimal(validation.mixture).threshold,
                    fit_error=validation.fit_error,
                )
            else:
                record = replace(
                    record, status=RegionStatus.PENDING, threshold=None, fit_error=validation.fit_error
                )
            row_records.append(record)
        records.append(tuple(row_records))

    grid = replace(grid, records=tuple(records))
    pending = grid.count(RegionStatus.PENDING)
    accepted = grid.fit_errors()[~np.isnan(grid.thresholds())]
    if accepted.size:
        logger.debug(f"Worst accepted region fit error M={accepted.max():.3e}")
    if pending:
        logger.warning(f"{pending} of {grid.rows * grid.cols} regions failed bimodal validation")
    return grid


def fill_invalid_regions(grid: RegionGrid) -> RegionGrid:
    """Fill pending regions from known neighbours, one wavefront at a time"""
    thresholds = grid.thresholds()
    known = ~np.isnan(thresholds)
    if not known.any():
        raise NoValidRegionError("No region passed bimodal validation")

    col_centers = grid.column_centers()
    row_centers = grid.row_centers()
    filled: Dict[Tuple[int, int], float] = {}
    wave = 0
    while not known.all():
        wave_values: Dict[Tuple[int, int], float] = {}
        for row, col in zip(*np.nonzero(~known)):
            weight_sum = 0.0
            value_sum = 0.0
            for dr, dc in NEIGHBOUR_OFFSETS:
                r, c = row + dr, col + dc
                if 0 <= r < grid.rows and 0 <= c < grid.cols and known[r, c]:
                    distance = math.hypot(col_centers[c] - col_centers[col], row_centers[r] - row_centers[row])
                    weight = 1.0 / distance
                    weight_sum += weight
                    value_sum += weight * thresholds[r, c]
            if weight_sum > 0:
                wave_values[(int(row), int(col))] = value_sum / weight_sum

        for (row, col), value in wave_values.items():
            thresholds[row, col] = value
            known[row, col] = True
        filled.update(wave_values)
        wave += 1

    if filled:
        logger.info(f"Interpolated {len(filled)} region threshold(s) in {wave} wave(s)")

    records = tuple(
        tuple(
            replace(record, status=RegionStatus.INTERPOLATED, threshold=filled[(row, col)])
            if (row, col) in filled else record
            for col, record in enumerate(row_records)
        )
        for row, row_records in enumerate(grid.records)
    )
    return replace(grid, records=records)


def _axis_weights(coords: np.ndarray, centers: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Bracketing knot indices and the weight of the upper knot, clamped at the ends"""
    if len(centers) == 1:
        zeros = np.zeros(len(coords), dtype=np.intp)
        return zeros, zeros, np.zeros(len(coords))
    clamped = np.clip(coords, centers[0], centers[-1])
    upper = np.clip(np.searchsorted(centers, clamped, side="right"), 1, len(centers) - 1)
    lower = upper - 1
    weight = (clamped - centers[lower]) / (centers[upper] - centers[lower])
    return lower, upper, weight


def interpolate_pixel_map(grid: RegionGrid) -> ThresholdMap:
    """Bilinear interpolation of region-center thresholds onto every pixel"""
    thresholds = grid.thresholds()
    if np.isnan(thresholds).any():
        raise NoValidRegionError("Grid still has pending regions; fill them first")

    x0, x1, wx = _axis_weights(np.arange(grid.image_width, dtype=np.float64), grid.column_centers())
    y0, y1, wy = _axis_weights(np.arange(grid.image_height, dtype=np.float64), grid.row_centers())

    top = (1.0 - wx) * thresholds[y0][:, x0] + wx * thresholds[y0][:, x1]
    bottom = (1.0 - wx) * thresholds[y1][:, x0] + wx * thresholds[y1][:, x1]
    values = (1.0 - wy)[:, None] * top + wy[:, None] * bottom
    return ThresholdMap(np.clip(values, 0.0, MAX_LEVEL))


def dynamic_binarize(image: GrayImage, region_size: Optional[Tuple[int, int]] = None,
                     tolerance: float = DEFAULT_TOLERANCE) -> Tuple[BinaryImage, ThresholdMap]:
    region_width, region_height = region_size or default_region_size(image)
    grid = partition(image, region_width, region_height)
    grid = estimate_region_thresholds(grid, tolerance)
    grid = fill_invalid_regions(grid)
    threshold_map = interpolate_pixel_map(grid)
    logger.info(
        f"Dynamic threshold map {threshold_map.width}x{threshold_map.height}: "
        f"{grid.count(RegionStatus.VALID)} valid, {grid.count(RegionStatus.INTERPOLATED)} interpolated regions"
    )
    return binarize_with_map(image, threshold_map), threshold_map
