"""
Persistence records for stacks, calibrations and simulator runs
"""

from typing import List, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator

from ..simulation.acquisition import SceneModel

FORMAT_VERSION = 1


class Manifest(BaseModel):
    """Stack directory descriptor stored as manifest.json"""
    model_config = ConfigDict(populate_by_name=True)

    width: int = Field(..., ge=1)
    height: int = Field(..., ge=1)
    frame_count: int = Field(..., ge=1, alias="frameCount")
    speed: Optional[float] = Field(None, gt=0)
    frame_pattern: str = Field("frame_{index:05d}.pgm", alias="framePattern")
    mask_pattern: Optional[str] = Field(None, alias="maskPattern")
    seed: Optional[int] = None

    @field_validator("frame_pattern", "mask_pattern")
    @classmethod
    def _indexed(cls, pattern: Optional[str]) -> Optional[str]:
        if pattern is not None and "{index" not in pattern:
            raise ValueError(f"Pattern '{pattern}' has no {{index}} field")
        return pattern

    def frame_names(self) -> List[str]:
        return [self.frame_pattern.format(index=i) for i in range(self.frame_count)]

    def mask_names(self) -> List[str]:
        if self.mask_pattern is None:
            return []
        return [self.mask_pattern.format(index=i) for i in range(self.frame_count)]


class CalibrationMetadata(BaseModel):
    """calibration.json next to the threshold, error and flag maps"""
    model_config = ConfigDict(populate_by_name=True)

    format_version: int = Field(FORMAT_VERSION, alias="formatVersion")
    width: int = Field(..., ge=1)
    height: int = Field(..., ge=1)
    calibration_speed: Optional[float] = Field(None, gt=0, alias="calibrationSpeed")
    frames_used: int = Field(..., ge=0, alias="framesUsed")
    error_tolerance: float = Field(..., gt=0, alias="errorTolerance")


class SimulationConfig(BaseModel):
    """A scene model plus the acquisition run to generate from it"""
    model: SceneModel
    frame_count: int = Field(..., ge=1)
    speed: Optional[float] = Field(None, gt=0)
