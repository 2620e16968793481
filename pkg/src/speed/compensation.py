"""
Conveyor speed (acquisition frequency) compensation.

Exposure time follows the line rate, so intensity levels and the optimal
threshold fall as the conveyor speeds up. The relation T(V) is taken as
piecewise linear through calibration points and clamped outside them. At
runtime it is resolved through a 256-entry table: entries[t] holds the
speed at which the threshold crosses t + 0.5, or NaN when it never does.
"""

import logging
from dataclasses import dataclass, replace
from typing import Dict, List, Sequence, Tuple

import numpy as np

from ..errors import (
    IncompleteDataError,
    InsufficientCalibrationError,
    MonotonicityError,
    SpeedRangeError,
    TableCorruptionError,
)
from ..imaging.images import LEVELS, MAX_LEVEL, ThresholdMap
from ..threshold.temporal import TemporalCalibration
from .models import LEVEL_COLUMNS, SpeedCalibrationPoint

logger = logging.getLogger(__name__)

BAND_TOLERANCE = 1e-9


@dataclass(frozen=True, eq=False)
class SpeedThresholdTable:
    entries: np.ndarray
    speeds: Tuple[float, ...]
    thresholds: Tuple[float, ...]

    def __post_init__(self) -> None:
        entries = np.asarray(self.entries, dtype=np.float64).copy()
        if entries.shape != (LEVELS,):
            raise TableCorruptionError(f"Speed table needs {LEVELS} entries, got {entries.shape}")
        entries.setflags(write=False)
        object.__setattr__(self, "entries", entries)

    @property
    def v_min(self) -> float:
        return self.speeds[0]

    @property
    def v_max(self) -> float:
        return self.speeds[-1]

    def covers(self, speed: float) -> bool:
        return self.v_min <= speed <= self.v_max

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SpeedThresholdTable):
            return NotImplemented
        return (np.array_equal(self.entries, other.entries, equal_nan=True)
                and self.speeds == other.speeds and self.thresholds == other.thresholds)


@dataclass(frozen=True)
class LevelRatio:
    mean: float
    max_deviation: float


@dataclass(frozen=True)
class LevelSpeedModel:
    """Level-to-Object-Min+ ratios per column and the fitted T(V) knots"""
    ratios: Dict[str, LevelRatio]
    curve: Tuple[Tuple[float, float], ...]


def _crossing_speed(speeds: Sequence[float], thresholds: Sequence[float], level: float) -> float:
    for i in range(len(speeds) - 1):
        upper, lower = thresholds[i], thresholds[i + 1]
        if upper >= level >= lower:
            if upper == lower:
                return speeds[i]
            return speeds[i] + (upper - level) / (upper - lower) * (speeds[i + 1] - speeds[i])
    return float("nan")


def build_table(points: Sequence[SpeedCalibrationPoint]) -> SpeedThresholdTable:
    """Fill the 256 breakpoint speeds from calibration points"""
    if len(points) < 2:
        raise InsufficientCalibrationError(f"Speed table needs at least 2 points, got {len(points)}")

    # rows are 1-based in input order
    ordered = sorted(enumerate(points, start=1), key=lambda item: item[1].speed)
    for (row_a, a), (row_b, b) in zip(ordered, ordered[1:]):
        if a.speed == b.speed:
            raise MonotonicityError(f"Rows {row_a} and {row_b} share speed {a.speed}", rows=(row_a, row_b))
        if b.threshold > a.threshold:
            raise MonotonicityError(
                f"Threshold rises with speed between rows {row_a} and {row_b} "
                f"({a.threshold} at {a.speed} -> {b.threshold} at {b.speed})",
                rows=(row_a, row_b),
            )

    speeds = tuple(point.speed for _, point in ordered)
    thresholds = tuple(point.threshold for _, point in ordered)
    entries = np.array([_crossing_speed(speeds, thresholds, t + 0.5) for t in range(LEVELS)])
    logger.info(
        f"Built speed table from {len(points)} points over [{speeds[0]}, {speeds[-1]}] m/min, "
        f"{int(np.count_nonzero(~np.isnan(entries)))} breakpoints"
    )
    return SpeedThresholdTable(entries=entries, speeds=speeds, thresholds=thresholds)


def _clamp_speed(table: SpeedThresholdTable, speed: float) -> float:
    if speed <= 0:
        raise SpeedRangeError(f"Speed must be positive, got {speed}")
    if not table.covers(speed):
        logger.debug(f"Speed {speed} clamped to [{table.v_min}, {table.v_max}]")
    return min(max(speed, table.v_min), table.v_max)


def _interpolate(table: SpeedThresholdTable, speed: float) -> float:
    return float(np.interp(speed, table.speeds, table.thresholds))


def threshold_band(table: SpeedThresholdTable, speed: float) -> int:
    """Integer threshold band for a speed, by binary search over the breakpoints"""
    speed = _clamp_speed(table, speed)
    defined = np.flatnonzero(~np.isnan(table.entries))
    if defined.size == 0:
        return int(np.floor(_interpolate(table, speed) + 0.5))
    first = int(defined[0])
    breakpoints = table.entries[first:int(defined[-1]) + 1]
    return first + int(np.searchsorted(-breakpoints, -speed, side="right"))


def lookup(table: SpeedThresholdTable, speed: float) -> float:
    """Real-valued threshold T(V), clamped to the calibrated speed range"""
    speed = _clamp_speed(table, speed)
    band = threshold_band(table, speed)
    value = _interpolate(table, speed)
    if abs(value - band) > 0.5 + BAND_TOLERANCE:
        raise TableCorruptionError(f"Threshold {value:.6f} at V={speed} falls outside band {band}")
    return value


def speed_ratio(table: SpeedThresholdTable, speed: float, calibration_speed: float) -> float:
    reference = lookup(table, calibration_speed)
    ratio = lookup(table, speed) / reference if reference else float("nan")
    if not (ratio > 0 and np.isfinite(ratio)):
        raise TableCorruptionError(f"Speed ratio r({speed}) = {ratio} is not positive")
    return ratio


def scale_threshold_map(calibration: TemporalCalibration, table: SpeedThresholdTable,
                        speed: float) -> ThresholdMap:
    """T(x, y, V) = T(x, y, V_cal) * T(V) / T(V_cal), clipped to the level range"""
    calibration_speed = calibration.calibration_speed
    if calibration_speed is None:
        raise SpeedRangeError("Calibration carries no acquisition speed")
    if not table.covers(calibration_speed):
        raise SpeedRangeError(
            f"Calibration speed {calibration_speed} outside table range [{table.v_min}, {table.v_max}]"
        )
    ratio = speed_ratio(table, speed, calibration_speed)
    logger.info(f"Scaling threshold map from V={calibration_speed} to V={speed}: r={ratio:.6f}")
    return ThresholdMap(np.clip(calibration.threshold_map.values * ratio, 0.0, MAX_LEVEL))


def scale_calibration(calibration: TemporalCalibration, table: SpeedThresholdTable,
                      speed: float) -> TemporalCalibration:
    """Calibration with a speed-scaled threshold map; error and flag maps untouched"""
    return replace(
        calibration,
        threshold_map=scale_threshold_map(calibration, table, speed),
        calibration_speed=speed,
    )


def fit_level_speed_model(points: Sequence[SpeedCalibrationPoint]) -> LevelSpeedModel:
    if len(points) < 3:
        raise IncompleteDataError(f"Level model needs at least 3 points, got {len(points)}")
    missing = [row for row, point in enumerate(points, start=1) if point.levels is None]
    if missing:
        raise IncompleteDataError(f"Rows {missing} have no level columns")

    reference = np.array([point.levels.object_min_plus for point in points])
    columns: Dict[str, List[float]] = {name: [] for name in LEVEL_COLUMNS}
    columns['threshold'] = []
    for point in points:
        for name, value in point.levels.as_dict().items():
            columns[name].append(value)
        columns['threshold'].append(point.threshold)

    ratios = {}
    for name, values in columns.items():
        ratio = np.asarray(values) / reference
        mean = float(ratio.mean())
        ratios[name] = LevelRatio(mean=mean, max_deviation=float(np.abs(ratio - mean).max()))

    curve = tuple(sorted((point.speed, point.threshold) for point in points))
    return LevelSpeedModel(ratios=ratios, curve=curve)
