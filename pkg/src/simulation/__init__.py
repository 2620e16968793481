"""
Synthetic acquisition used as ground truth for the thresholding methods.
"""

from .acquisition import (
    PlantedTruth,
    SceneModel,
    SensorSegment,
    SimulatedStack,
    SpeedCurve,
    default_speed_curve,
    defect_band,
    generate_stack,
    linear_illumination,
    occupancy_map,
    planted_truth,
    random_cell_gain,
)

__all__ = [
    'PlantedTruth',
    'SceneModel',
    'SensorSegment',
    'SimulatedStack',
    'SpeedCurve',
    'default_speed_curve',
    'defect_band',
    'generate_stack',
    'linear_illumination',
    'occupancy_map',
    'planted_truth',
    'random_cell_gain',
]
