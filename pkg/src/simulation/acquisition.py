"""
Synthetic line-scan / array acquisition.

Simulates the intensity distortions of a CCD inspection line and emits
frame stacks together with exact ground-truth object masks:

    f_i(x, y) = clamp(round(level_i(x, y) * I(x) * G(x) * S(x) * g(V) + n))

level is the scene or object intensity depending on occupancy, I the
illumination profile, G the per-cell gain, S the sensor segment gain, g(V)
the exposure factor at conveyor speed V and n ~ N(0, noise_sigma). Noise
enters at acquisition, after all gains and before quantization.

Random streams: numpy PCG64 seeded through SeedSequence([seed, stream, i]),
one substream per frame, so serial and parallel generation agree bit for bit.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from ..errors import GeometryError, ModelError
from ..imaging.images import MAX_LEVEL, BinaryImage, FrameStack
from ..threshold.gaussian import SIGMA_FLOOR, BimodalMixture

logger = logging.getLogger(__name__)

OCCUPANCY_STREAM = 0
FRAME_STREAM = 1
CELL_GAIN_STREAM = 2

REFERENCE_SPEED = 20.7

# Object Min+ level measured against conveyor speed (m/min)
MEASURED_OBJECT_LEVELS = (
    (20.7, 221.532847),
    (25.9, 174.338624),
    (31.1, 147.510373),
    (36.2, 130.479452),
    (41.3, 118.513120),
    (46.4, 109.644670),
    (51.4, 102.927928),
    (56.5, 97.474747),
    (61.6, 93.040293),
    (66.7, 89.363484),
    (72.5, 85.877863),
)


class SensorSegment(BaseModel):
    """Columns [start, stop) of the sensor with their own sensitivity"""
    model_config = ConfigDict(frozen=True)

    start: int = Field(..., ge=0)
    stop: int = Field(..., ge=1)
    gain: float = Field(..., gt=0)

    @model_validator(mode='after')
    def _ordered(self) -> 'SensorSegment':
        if self.stop <= self.start:
            raise ValueError(f"Segment stop {self.stop} must exceed start {self.start}")
        return self


class SpeedCurve(BaseModel):
    """Monotone exposure factor g(V), piecewise linear, g(reference_speed) = 1"""
    model_config = ConfigDict(frozen=True)

    speeds: List[float]
    factors: List[float]

    @model_validator(mode='after')
    def _monotone(self) -> 'SpeedCurve':
        if len(self.speeds) != len(self.factors) or not self.speeds:
            raise ValueError("Speed curve needs matching, nonempty speeds and factors")
        if any(b <= a for a, b in zip(self.speeds, self.speeds[1:])):
            raise ValueError("Speed curve speeds must be strictly increasing")
        if any(f <= 0 for f in self.factors):
            raise ValueError("Speed curve factors must be positive")
        if any(b > a for a, b in zip(self.factors, self.factors[1:])):
            raise ValueError("Speed curve factors must not rise with speed")
        return self

    def factor(self, speed: float) -> float:
        return float(np.interp(speed, self.speeds, self.factors))


def default_speed_curve() -> SpeedCurve:
    reference = dict(MEASURED_OBJECT_LEVELS)[REFERENCE_SPEED]
    return SpeedCurve(
        speeds=[speed for speed, _ in MEASURED_OBJECT_LEVELS],
        factors=[level / reference for _, level in MEASURED_OBJECT_LEVELS],
    )


class SceneModel(BaseModel):
    model_config = ConfigDict(frozen=True)

    width: int = Field(..., ge=1)
    height: int = Field(1, ge=1)
    scene_level: float = Field(40.0, gt=0, lt=MAX_LEVEL)
    object_level: float = Field(180.0, gt=0, lt=MAX_LEVEL)
    noise_sigma: float = Field(3.0, ge=0)
    illumination_profile: Optional[List[float]] = None
    cell_gain: Optional[List[float]] = None
    nonlinearity_segments: List[SensorSegment] = Field(default_factory=list)
    object_fraction_min: float = Field(0.2, ge=0, le=1)
    object_fraction_max: float = Field(0.4, ge=0, le=1)
    shadowed_columns: List[Tuple[int, int]] = Field(default_factory=list)
    speed_curve: SpeedCurve = Field(default_factory=default_speed_curve)
    reference_speed: float = Field(REFERENCE_SPEED, gt=0)
    seed: int = Field(0, ge=0)

    @model_validator(mode='after')
    def _geometry(self) -> 'SceneModel':
        if self.illumination_profile is not None:
            if len(self.illumination_profile) != self.width:
                raise ValueError(f"Illumination profile needs {self.width} values")
            if min(self.illumination_profile) <= 0:
                raise ValueError("Illumination profile must be positive")
        if self.cell_gain is not None:
            if len(self.cell_gain) != self.width:
                raise ValueError(f"Cell gain needs {self.width} values")
            if min(self.cell_gain) < 0:
                raise ValueError("Cell gain must be nonnegative")
        for segment in self.nonlinearity_segments:
            if segment.stop > self.width:
                raise ValueError(f"Segment [{segment.start}, {segment.stop}) outside {self.width} columns")
        for start, stop in self.shadowed_columns:
            if not 0 <= start < stop <= self.width:
                raise ValueError(f"Shadowed columns [{start}, {stop}) outside {self.width} columns")
        if self.object_fraction_min > self.object_fraction_max:
            raise ValueError("object_fraction_min exceeds object_fraction_max")
        return self

    @classmethod
    def create(cls, **fields) -> 'SceneModel':
        try:
            return cls(**fields)
        except ValidationError as e:
            raise ModelError(f"Invalid scene model: {e}")

    def gain_profile(self) -> np.ndarray:
        """I(x) * G(x) * S(x) per column"""
        gain = np.ones(self.width)
        if self.illumination_profile is not None:
            gain *= np.asarray(self.illumination_profile)
        if self.cell_gain is not None:
            gain *= np.asarray(self.cell_gain)
        for segment in self.nonlinearity_segments:
            gain[segment.start:segment.stop] *= segment.gain
        return gain


@dataclass(frozen=True, eq=False)
class SimulatedStack:
    stack: FrameStack
    masks: np.ndarray

    def misclassification(self, labels: Union[np.ndarray, Sequence[BinaryImage]]) -> float:
        """Fraction of pixels, over all frames, whose label disagrees with the ground truth"""
        if not isinstance(labels, np.ndarray):
            labels = np.stack([image.pixels for image in labels])
        labels = np.asarray(labels, dtype=bool)
        if labels.shape != self.masks.shape:
            raise GeometryError(f"Labels {labels.shape} do not match ground truth {self.masks.shape}")
        return float(np.mean(labels != self.masks))


@dataclass(frozen=True, eq=False)
class PlantedTruth:
    """Per-pixel mixture parameters implied by a scene model, before quantization"""
    background_mu: np.ndarray
    object_mu: np.ndarray
    sigma: float
    object_prior: np.ndarray

    def mixture_at(self, x: int, y: int = 0) -> BimodalMixture:
        sigma = max(self.sigma, SIGMA_FLOOR)
        return BimodalMixture.from_parameters(
            float(self.background_mu[y, x]), sigma,
            float(self.object_mu[y, x]), sigma,
            float(self.object_prior[y, x]),
        )


def linear_illumination(width: int, amplitude: float) -> List[float]:
    """Profile rising linearly from 1 - amplitude to 1 + amplitude across the columns"""
    if not 0 <= amplitude < 1:
        raise ModelError(f"Illumination amplitude must lie in [0, 1), got {amplitude}")
    return np.linspace(1.0 - amplitude, 1.0 + amplitude, width).tolist()


def random_cell_gain(width: int, sigma_g: float, seed: int = 0) -> List[float]:
    """Fixed-pattern per-cell gain 1 + N(0, sigma_g), kept positive"""
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, CELL_GAIN_STREAM])))
    return np.clip(1.0 + sigma_g * rng.standard_normal(width), 0.01, None).tolist()


def occupancy_map(model: SceneModel) -> np.ndarray:
    """Per-pixel probability that the object covers the pixel in a frame"""
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([model.seed, OCCUPANCY_STREAM])))
    fractions = rng.uniform(model.object_fraction_min, model.object_fraction_max,
                            size=(model.height, model.width))
    for start, stop in model.shadowed_columns:
        fractions[:, start:stop] = 0.0
    return fractions


def _speed_factor(model: SceneModel, speed: Optional[float]) -> float:
    if speed is None:
        speed = model.reference_speed
    if speed <= 0:
        raise ModelError(f"Speed must be positive, got {speed}")
    return model.speed_curve.factor(speed) / model.speed_curve.factor(model.reference_speed)


def _generate_frame(model: SceneModel, index: int, fractions: np.ndarray,
                    gain: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([model.seed, FRAME_STREAM, index])))
    mask = rng.random(fractions.shape) < fractions
    signal = np.where(mask, model.object_level, model.scene_level) * gain
    if model.noise_sigma > 0:
        signal = signal + rng.normal(0.0, model.noise_sigma, size=signal.shape)
    # round half up, then clamp to the 8-bit range
    frame = np.clip(np.floor(signal + 0.5), 0, MAX_LEVEL).astype(np.uint8)
    return frame, mask


def generate_stack(model: SceneModel, frame_count: int, speed: Optional[float] = None,
                   workers: int = 1) -> SimulatedStack:
    """Frames and ground-truth masks for frame_count acquisitions at speed V"""
    if frame_count < 1:
        raise ModelError(f"Frame count must be at least 1, got {frame_count}")
    factor = _speed_factor(model, speed)
    gain = model.gain_profile()[np.newaxis, :] * factor
    fractions = occupancy_map(model)

    def render(index: int) -> Tuple[np.ndarray, np.ndarray]:
        return _generate_frame(model, index, fractions, gain)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            rendered = list(executor.map(render, range(frame_count)))
    else:
        rendered = [render(index) for index in range(frame_count)]

    frames = np.stack([frame for frame, _ in rendered])
    masks = np.stack([mask for _, mask in rendered])
    acquisition_speed = speed if speed is not None else model.reference_speed
    logger.info(
        f"Simulated {frame_count} frame(s) of {model.width}x{model.height} at V={acquisition_speed} "
        f"(seed {model.seed}, exposure factor {factor:.4f})"
    )
    return SimulatedStack(stack=FrameStack(frames, acquisition_speed), masks=masks)


def planted_truth(model: SceneModel, speed: Optional[float] = None) -> PlantedTruth:
    scale = model.gain_profile()[np.newaxis, :] * _speed_factor(model, speed)
    shape = (model.height, model.width)
    return PlantedTruth(
        background_mu=np.broadcast_to(model.scene_level * scale, shape).copy(),
        object_mu=np.broadcast_to(model.object_level * scale, shape).copy(),
        sigma=model.noise_sigma,
        object_prior=occupancy_map(model),
    )


def defect_band(model: SceneModel, columns: Tuple[int, int], gain: float) -> SceneModel:
    """Model with the cell gain overridden on columns [start, stop)"""
    start, stop = columns
    if not 0 <= start < stop <= model.width:
        raise ModelError(f"Defect band [{start}, {stop}) outside {model.width} columns")
    if gain < 0:
        raise ModelError(f"Defect gain must be nonnegative, got {gain}")
    current = list(model.cell_gain) if model.cell_gain is not None else [1.0] * model.width
    cell_gain = current[:start] + [gain] * (stop - start) + current[stop:]
    if cell_gain == current:
        return model
    return model.model_copy(update={'cell_gain': cell_gain})
