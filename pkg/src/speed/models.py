"""
Speed calibration records.

Field aliases are the calibration CSV column headers.
"""

from typing import Dict, Optional

from pydantic import BaseModel, ConfigDict, Field

LEVEL_COLUMNS = {
    'object_min_plus': 'Object Min+',
    'object_max': 'Object Max',
    'object_min_minus': 'Object Min-',
    'scene_min_plus': 'Scene Min+',
    'scene_max': 'Scene Max',
    'scene_min_minus': 'Scene Min-',
}


class LevelSet(BaseModel):
    """Intensity levels measured from one temporal histogram at a given speed"""
    model_config = ConfigDict(populate_by_name=True, frozen=True)

    object_min_plus: float = Field(..., gt=0, alias='Object Min+')
    object_max: float = Field(..., ge=0, alias='Object Max')
    object_min_minus: float = Field(..., ge=0, alias='Object Min-')
    scene_min_plus: float = Field(..., ge=0, alias='Scene Min+')
    scene_max: float = Field(..., ge=0, alias='Scene Max')
    scene_min_minus: float = Field(..., ge=0, alias='Scene Min-')

    def as_dict(self) -> Dict[str, float]:
        return {name: getattr(self, name) for name in LEVEL_COLUMNS}


class SpeedCalibrationPoint(BaseModel):
    """Optimal temporal threshold measured at one conveyor speed (m/min)"""
    model_config = ConfigDict(populate_by_name=True, frozen=True)

    speed: float = Field(..., gt=0, alias='V')
    threshold: float = Field(..., gt=0, lt=255, alias='Threshold')
    levels: Optional[LevelSet] = None
