"""
Conveyor speed compensation of binarization thresholds.
"""

from .models import LevelSet, SpeedCalibrationPoint
from .compensation import (
    LevelSpeedModel,
    SpeedThresholdTable,
    build_table,
    fit_level_speed_model,
    lookup,
    scale_calibration,
    scale_threshold_map,
    threshold_band,
)

__all__ = [
    'LevelSet',
    'SpeedCalibrationPoint',
    'LevelSpeedModel',
    'SpeedThresholdTable',
    'build_table',
    'fit_level_speed_model',
    'lookup',
    'scale_calibration',
    'scale_threshold_map',
    'threshold_band',
]
