"""
Speed calibration and speed table CSV files.

Calibration CSV: header with V and Threshold, optionally followed by the six
level columns (Object Min+, Object Max, Object Min-, Scene Min+, Scene Max,
Scene Min-). Rows are numbered from 1 after the header.

Table CSV: header "t,speed", then 256 rows "t,<speed>" where the speed is
NEVER for thresholds the calibrated range never crosses, then one
"point,<V>,<T>" row per calibration knot.
"""

import csv
import logging
import math
from typing import List, Sequence

import numpy as np
from pydantic import ValidationError

from ..errors import FormatError, MonotonicityError
from ..imaging.images import LEVELS
from ..speed.compensation import SpeedThresholdTable, build_table
from ..speed.models import LEVEL_COLUMNS, LevelSet, SpeedCalibrationPoint
from .files import PathLike, atomic_output

logger = logging.getLogger(__name__)

SPEED_COLUMN = "V"
THRESHOLD_COLUMN = "Threshold"
NEVER = "NEVER"
POINT = "point"


def read_speed_calibration(path: PathLike) -> List[SpeedCalibrationPoint]:
    with open(path, newline="", encoding="utf-8") as handle:
        reader = csv.DictReader(handle)
        header = [name.strip() for name in reader.fieldnames or []]
        missing = {SPEED_COLUMN, THRESHOLD_COLUMN} - set(header)
        if missing:
            raise FormatError(f"{path}: missing column(s) {sorted(missing)}")
        with_levels = set(LEVEL_COLUMNS.values()) <= set(header)

        points = []
        for row_number, row in enumerate(reader, start=1):
            row = {key.strip(): (value or "").strip() for key, value in row.items() if key is not None}
            try:
                levels = None
                if with_levels:
                    levels = LevelSet.model_validate({column: row[column] for column in LEVEL_COLUMNS.values()})
                points.append(SpeedCalibrationPoint(
                    speed=row[SPEED_COLUMN], threshold=row[THRESHOLD_COLUMN], levels=levels,
                ))
            except ValidationError as e:
                raise FormatError(f"{path}: row {row_number}: {e.errors()[0]['msg']}")

    logger.info(f"Read {len(points)} speed calibration point(s) from {path}")
    return points


def write_speed_calibration(path: PathLike, points: Sequence[SpeedCalibrationPoint]) -> None:
    with_levels = bool(points) and all(point.levels is not None for point in points)
    header = [SPEED_COLUMN, THRESHOLD_COLUMN]
    if with_levels:
        header += list(LEVEL_COLUMNS.values())
    with atomic_output(path) as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        for point in points:
            row = [repr(point.speed), repr(point.threshold)]
            if with_levels:
                row += [repr(value) for value in point.levels.as_dict().values()]
            writer.writerow(row)


def load_speed_table(path: PathLike) -> SpeedThresholdTable:
    """Table built straight from a calibration CSV"""
    return build_table(read_speed_calibration(path))


def write_speed_table(path: PathLike, table: SpeedThresholdTable) -> None:
    with atomic_output(path) as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["t", "speed"])
        for level, speed in enumerate(table.entries):
            writer.writerow([level, NEVER if math.isnan(speed) else repr(float(speed))])
        for speed, threshold in zip(table.speeds, table.thresholds):
            writer.writerow([POINT, repr(speed), repr(threshold)])


def _check_knots(path: PathLike, speeds: List[float], thresholds: List[float], lines: List[int]) -> None:
    """Knots must be stored by increasing speed with nonincreasing thresholds"""
    for index in range(1, len(speeds)):
        line_a, line_b = lines[index - 1], lines[index]
        if speeds[index] <= speeds[index - 1]:
            raise MonotonicityError(
                f"{path}: knot speeds not increasing between lines {line_a} and {line_b}", rows=(line_a, line_b)
            )
        if thresholds[index] > thresholds[index - 1]:
            raise MonotonicityError(
                f"{path}: threshold rises with speed between lines {line_a} and {line_b}", rows=(line_a, line_b)
            )


def read_speed_table(path: PathLike) -> SpeedThresholdTable:
    entries = np.full(LEVELS, np.nan)
    seen = set()
    speeds, thresholds, knot_lines = [], [], []
    with open(path, newline="", encoding="utf-8") as handle:
        rows = list(csv.reader(handle))
    if not rows or [cell.strip() for cell in rows[0]] != ["t", "speed"]:
        raise FormatError(f"{path}: line 1 must be 't,speed'")

    for line_number, row in enumerate(rows[1:], start=2):
        cells = [cell.strip() for cell in row]
        if not cells or cells == [""]:
            continue
        try:
            if cells[0] == POINT and len(cells) == 3:
                speeds.append(float(cells[1]))
                thresholds.append(float(cells[2]))
                knot_lines.append(line_number)
                continue
            if len(cells) != 2:
                raise ValueError(f"expected 2 fields, got {len(cells)}")
            level = int(cells[0])
            if not 0 <= level < LEVELS or level in seen:
                raise ValueError(f"threshold index {level} out of range or repeated")
            seen.add(level)
            entries[level] = np.nan if cells[1] == NEVER else float(cells[1])
        except ValueError as e:
            raise FormatError(f"{path}: line {line_number}: {e}")

    if len(seen) != LEVELS:
        raise FormatError(f"{path}: table has {len(seen)} of {LEVELS} rows")
    if len(speeds) < 2:
        raise FormatError(f"{path}: table carries {len(speeds)} calibration point(s), at least 2 needed")
    _check_knots(path, speeds, thresholds, knot_lines)
    return SpeedThresholdTable(entries=entries, speeds=tuple(speeds), thresholds=tuple(thresholds))


def open_speed_table(path: PathLike) -> SpeedThresholdTable:
    """Table from either a table CSV or a calibration CSV, told apart by the header"""
    with open(path, encoding="utf-8") as handle:
        first = handle.readline().strip().replace(" ", "")
    if first == "t,speed":
        return read_speed_table(path)
    return load_speed_table(path)
