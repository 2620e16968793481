"""
Temporal thresholding.

Each pixel gets its own statistical population: its intensity history over
a stack of frames. Every temporal histogram is fitted and thresholded on
its own, and only the per-pixel threshold, expected error and status flag
are kept once calibration is done.

Calibration happens at setup time; apply() is the runtime path and costs
one comparison per pixel.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import ndimage

from ..errors import GeometryError, InsufficientFramesError, NotBimodalError
from ..imaging.histogram import Histogram, build_temporal, mean_and_variance
from ..imaging.images import MAX_LEVEL, BinaryImage, FrameStack, GrayImage, ThresholdMap
from .gaussian import SIGMA_FLOOR, upper_tail, lower_tail
from .global_threshold import binarize_with_map, misclassification_error, solve_optimal
from .mixture import fit_bimodal

logger = logging.getLogger(__name__)

DEFAULT_MIN_FRAMES = 200
DEFAULT_ERROR_TOLERANCE = 1e-4
DEFAULT_FALLBACK_SIGMAS = 4.0


class PixelFlag(Enum):
    """Per-pixel calibration status; values are the flag-file characters"""
    OK = "o"
    NOT_BIMODAL = "n"
    ERROR_ABOVE_TOLERANCE = "e"


@dataclass(frozen=True)
class _PixelFit:
    flag: PixelFlag
    threshold: float = math.nan
    error: float = math.nan
    background_mu: float = math.nan
    object_mu: float = math.nan
    mode_mu: float = math.nan
    mode_sigma: float = math.nan


@dataclass(frozen=True, eq=False)
class TemporalCalibration:
    """Per-pixel thresholds, expected errors and flags; no histograms are retained"""
    threshold_map: ThresholdMap
    error_map: np.ndarray
    flag_map: np.ndarray
    calibration_speed: Optional[float] = None
    frames_used: int = 0
    error_tolerance: float = DEFAULT_ERROR_TOLERANCE

    def __post_init__(self) -> None:
        error_map = np.asarray(self.error_map, dtype=np.float64).copy()
        flag_map = np.asarray(self.flag_map, dtype="<U1").copy()
        shape = self.threshold_map.shape
        if error_map.shape != shape or flag_map.shape != shape:
            raise GeometryError(
                f"Calibration maps disagree: thresholds {shape}, errors {error_map.shape}, flags {flag_map.shape}"
            )
        allowed = {flag.value for flag in PixelFlag}
        if not set(np.unique(flag_map)) <= allowed:
            raise GeometryError(f"Flag map holds characters outside {sorted(allowed)}")
        error_map.setflags(write=False)
        flag_map.setflags(write=False)
        object.__setattr__(self, "error_map", error_map)
        object.__setattr__(self, "flag_map", flag_map)

    @property
    def width(self) -> int:
        return self.threshold_map.width

    @property
    def height(self) -> int:
        return self.threshold_map.height

    @property
    def shape(self) -> Tuple[int, int]:
        return self.threshold_map.shape

    def mask(self, flag: PixelFlag) -> np.ndarray:
        return self.flag_map == flag.value


@dataclass(frozen=True)
class DefectArea:
    """Bounding box of a connected group of non-ok pixels"""
    x: int
    y: int
    width: int
    height: int
    pixels: int


@dataclass(frozen=True)
class QualityReport:
    flag_counts: Dict[str, int]
    max_error: float
    mean_error: float
    defect_areas: List[DefectArea] = field(default_factory=list)

    @property
    def defect_count(self) -> int:
        return len(self.defect_areas)


@dataclass(frozen=True)
class GlobalComparison:
    """Misclassification rates of a pooled global threshold versus temporal calibration"""
    global_rate: float
    temporal_rate: float
    global_threshold: float
    from_ground_truth: bool


def _fit_pixel(stack: FrameStack, x: int, y: int, error_tolerance: float) -> _PixelFit:
    histogram = build_temporal(stack, x, y)
    try:
        mixture = fit_bimodal(histogram)
    except NotBimodalError:
        moments = mean_and_variance(histogram)
        return _PixelFit(
            flag=PixelFlag.NOT_BIMODAL,
            mode_mu=moments.mean,
            mode_sigma=max(math.sqrt(moments.variance), SIGMA_FLOOR),
        )

    threshold = solve_optimal(mixture).threshold
    error = misclassification_error(mixture, threshold).total
    flag = PixelFlag.OK if error <= error_tolerance else PixelFlag.ERROR_ABOVE_TOLERANCE
    return _PixelFit(
        flag=flag,
        threshold=threshold,
        error=error,
        background_mu=mixture.background.mu,
        object_mu=mixture.object.mu,
    )


def _fit_pixels(stack: FrameStack, indices: Sequence[int], error_tolerance: float) -> List[_PixelFit]:
    width = stack.width
    return [_fit_pixel(stack, index % width, index // width, error_tolerance) for index in indices]


def calibrate(stack: FrameStack, min_frames: int = DEFAULT_MIN_FRAMES,
              error_tolerance: float = DEFAULT_ERROR_TOLERANCE, workers: int = 1,
              fallback_sigmas: float = DEFAULT_FALLBACK_SIGMAS) -> TemporalCalibration:
    """Fit every pixel's temporal histogram and keep threshold, error and flag maps"""
    if stack.frame_count < min_frames:
        raise InsufficientFramesError(
            f"Calibration needs at least {min_frames} frames, stack has {stack.frame_count}"
        )

    pixel_count = stack.width * stack.height
    chunk_count = max(1, min(pixel_count, workers * 4))
    chunks = np.array_split(np.arange(pixel_count), chunk_count)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            parts = list(executor.map(lambda chunk: _fit_pixels(stack, chunk, error_tolerance), chunks))
    else:
        parts = [_fit_pixels(stack, chunk, error_tolerance) for chunk in chunks]
    fits = [fit for part in parts for fit in part]

    fitted = [fit for fit in fits if fit.flag is not PixelFlag.NOT_BIMODAL]
    if fitted:
        dark_limit = 0.5 * (np.mean([fit.background_mu for fit in fitted])
                            + np.mean([fit.object_mu for fit in fitted]))
    else:
        dark_limit = MAX_LEVEL / 2.0

    thresholds = np.empty(pixel_count)
    errors = np.empty(pixel_count)
    flags = np.empty(pixel_count, dtype="<U1")
    for index, fit in enumerate(fits):
        flags[index] = fit.flag.value
        if fit.flag is PixelFlag.NOT_BIMODAL:
            if fit.mode_mu < dark_limit:
                fallback = min(fit.mode_mu + fallback_sigmas * fit.mode_sigma, MAX_LEVEL)
                errors[index] = upper_tail(fallback, fit.mode_mu, fit.mode_sigma)
            else:
                fallback = max(fit.mode_mu - fallback_sigmas * fit.mode_sigma, 0.0)
                errors[index] = lower_tail(fallback, fit.mode_mu, fit.mode_sigma)
            thresholds[index] = fallback
        else:
            thresholds[index] = fit.threshold
            errors[index] = fit.error

    shape = stack.shape
    calibration = TemporalCalibration(
        threshold_map=ThresholdMap(thresholds.reshape(shape)),
        error_map=errors.reshape(shape),
        flag_map=flags.reshape(shape),
        calibration_speed=stack.acquisition_speed,
        frames_used=stack.frame_count,
        error_tolerance=error_tolerance,
    )

    not_bimodal = int(calibration.mask(PixelFlag.NOT_BIMODAL).sum())
    above = int(calibration.mask(PixelFlag.ERROR_ABOVE_TOLERANCE).sum())
    logger.info(
        f"Calibrated {pixel_count} pixels from {stack.frame_count} frames: "
        f"{pixel_count - not_bimodal - above} ok, {not_bimodal} not bimodal, {above} above tolerance"
    )
    if not_bimodal or above:
        logger.warning(f"{not_bimodal + above} pixel(s) flagged during temporal calibration")
    return calibration


def apply(calibration: TemporalCalibration, image: GrayImage) -> BinaryImage:
    """Runtime binarization with the stored per-pixel thresholds"""
    return binarize_with_map(image, calibration.threshold_map)


def quality_report(calibration: TemporalCalibration) -> QualityReport:
    """Flag counts, error statistics and the connected areas of non-ok pixels"""
    counts = {flag.name.lower(): int(calibration.mask(flag).sum()) for flag in PixelFlag}
    defects = ~calibration.mask(PixelFlag.OK)
    # diagonal neighbours join one area
    labels, _ = ndimage.label(defects, structure=np.ones((3, 3), dtype=bool))
    areas = []
    for index, box in enumerate(ndimage.find_objects(labels), start=1):
        if box is None:
            continue
        rows, cols = box
        areas.append(DefectArea(
            x=cols.start,
            y=rows.start,
            width=cols.stop - cols.start,
            height=rows.stop - rows.start,
            pixels=int((labels[box] == index).sum()),
        ))
    return QualityReport(
        flag_counts=counts,
        max_error=float(calibration.error_map.max()),
        mean_error=float(calibration.error_map.mean()),
        defect_areas=areas,
    )


def compare_with_global(stack: FrameStack, truth: Optional[np.ndarray] = None,
                        min_frames: int = DEFAULT_MIN_FRAMES,
                        error_tolerance: float = DEFAULT_ERROR_TOLERANCE,
                        workers: int = 1) -> GlobalComparison:
    """
    Pooled-histogram global threshold versus temporal calibration.

    With a ground-truth mask stack the rates are observed misclassification
    fractions; without one they are the predicted errors.
    """
    pooled = Histogram.from_samples(stack.frames)
    global_result = solve_optimal(fit_bimodal(pooled))
    calibration = calibrate(stack, min_frames, error_tolerance, workers)

    if truth is None:
        return GlobalComparison(
            global_rate=global_result.expected_error,
            temporal_rate=float(calibration.error_map.mean()),
            global_threshold=global_result.threshold,
            from_ground_truth=False,
        )

    truth = np.asarray(truth, dtype=bool)
    if truth.shape != stack.frames.shape:
        raise GeometryError(f"Ground truth shape {truth.shape} does not match stack {stack.frames.shape}")
    global_labels = stack.frames > global_result.threshold
    temporal_labels = stack.frames > calibration.threshold_map.values[np.newaxis]
    comparison = GlobalComparison(
        global_rate=float(np.mean(global_labels != truth)),
        temporal_rate=float(np.mean(temporal_labels != truth)),
        global_threshold=global_result.threshold,
        from_ground_truth=True,
    )
    logger.info(
        f"Misclassification: global {comparison.global_rate:.4%} (T={global_result.threshold:.3f}), "
        f"temporal {comparison.temporal_rate:.4%}"
    )
    return comparison
