"""
Plain-text map files and calibration directories.

A real-valued map file holds "W H" on its first line followed by H lines of
W whitespace-separated decimals in row-major order, written with 17
significant digits. Flag files share the header and carry one character per
pixel from {o, n, e}.

A calibration directory contains threshold.map, error.map, flags.txt and
calibration.json; the metadata file is written last.
"""

import json
import logging
from pathlib import Path
from typing import List, Tuple

import numpy as np
from pydantic import ValidationError

from ..errors import FormatError
from ..imaging.images import ThresholdMap
from ..threshold.temporal import PixelFlag, TemporalCalibration
from .files import PathLike, atomic_output
from .models import CalibrationMetadata

logger = logging.getLogger(__name__)

THRESHOLD_FILE = "threshold.map"
ERROR_FILE = "error.map"
FLAG_FILE = "flags.txt"
METADATA_FILE = "calibration.json"


def _read_header(lines: List[str], path: PathLike) -> Tuple[int, int]:
    if not lines:
        raise FormatError(f"{path}: empty file")
    fields = lines[0].split()
    if len(fields) != 2 or not all(field.isdigit() for field in fields):
        raise FormatError(f"{path}: line 1 must be 'W H', got '{lines[0].strip()}'")
    width, height = int(fields[0]), int(fields[1])
    if width < 1 or height < 1:
        raise FormatError(f"{path}: empty geometry {width}x{height}")
    return width, height


def write_real_map(path: PathLike, values: np.ndarray) -> None:
    values = np.asarray(values, dtype=np.float64)
    height, width = values.shape
    with atomic_output(path) as handle:
        handle.write(f"{width} {height}\n")
        for row in values:
            handle.write(" ".join("%.17g" % value for value in row) + "\n")


def read_real_map(path: PathLike) -> np.ndarray:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    width, height = _read_header(lines, path)
    tokens = " ".join(lines[1:]).split()
    if len(tokens) != width * height:
        raise FormatError(f"{path}: header declares {width}x{height} = {width * height} values, body has {len(tokens)}")
    try:
        values = np.array([float(token) for token in tokens])
    except ValueError as e:
        raise FormatError(f"{path}: {e}")
    return values.reshape(height, width)


def write_threshold_map(path: PathLike, threshold_map: ThresholdMap) -> None:
    write_real_map(path, threshold_map.values)


def read_threshold_map(path: PathLike) -> ThresholdMap:
    return ThresholdMap(read_real_map(path))


def write_flag_map(path: PathLike, flags: np.ndarray) -> None:
    height, width = flags.shape
    with atomic_output(path) as handle:
        handle.write(f"{width} {height}\n")
        for row in flags:
            handle.write("".join(row) + "\n")


def read_flag_map(path: PathLike) -> np.ndarray:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    width, height = _read_header(lines, path)
    body = "".join("".join(line.split()) for line in lines[1:])
    if len(body) != width * height:
        raise FormatError(f"{path}: header declares {width * height} flags, body has {len(body)}")
    allowed = {flag.value for flag in PixelFlag}
    unknown = set(body) - allowed
    if unknown:
        raise FormatError(f"{path}: unknown flag character(s) {sorted(unknown)}")
    return np.array(list(body), dtype="<U1").reshape(height, width)


def save_calibration(directory: PathLike, calibration: TemporalCalibration) -> Path:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    write_threshold_map(directory / THRESHOLD_FILE, calibration.threshold_map)
    write_real_map(directory / ERROR_FILE, calibration.error_map)
    write_flag_map(directory / FLAG_FILE, calibration.flag_map)

    metadata = CalibrationMetadata(
        width=calibration.width,
        height=calibration.height,
        calibration_speed=calibration.calibration_speed,
        frames_used=calibration.frames_used,
        error_tolerance=calibration.error_tolerance,
    )
    with atomic_output(directory / METADATA_FILE) as handle:
        handle.write(metadata.model_dump_json(by_alias=True, indent=2) + "\n")
    logger.info(f"Saved {calibration.width}x{calibration.height} calibration to {directory}")
    return directory


def load_calibration(directory: PathLike) -> TemporalCalibration:
    directory = Path(directory)
    metadata_path = directory / METADATA_FILE
    if not metadata_path.is_file():
        raise FormatError(f"{directory} is not a calibration directory (no {METADATA_FILE})")
    try:
        metadata = CalibrationMetadata.model_validate(json.loads(metadata_path.read_text(encoding="utf-8")))
    except (ValueError, ValidationError) as e:
        raise FormatError(f"{metadata_path}: {e}")

    threshold_map = read_threshold_map(directory / THRESHOLD_FILE)
    if threshold_map.shape != (metadata.height, metadata.width):
        raise FormatError(
            f"{directory}: threshold map is {threshold_map.width}x{threshold_map.height}, "
            f"metadata says {metadata.width}x{metadata.height}"
        )
    return TemporalCalibration(
        threshold_map=threshold_map,
        error_map=read_real_map(directory / ERROR_FILE),
        flag_map=read_flag_map(directory / FLAG_FILE),
        calibration_speed=metadata.calibration_speed,
        frames_used=metadata.frames_used,
        error_tolerance=metadata.error_tolerance,
    )
