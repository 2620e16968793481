"""
Global minimum-error thresholding.

The optimal threshold is where the weighted densities cross,
P1 p1(T) = P2 p2(T). For Gaussian modes that reduces to
A T^2 + B T + C = 0 with

    A = s1^2 - s2^2
    B = 2 (mu1 s2^2 - mu2 s1^2)
    C = s1^2 mu2^2 - s2^2 mu1^2 + 2 s1^2 s2^2 ln(s2 P1 / (s1 P2))

and, for equal deviations, the closed form
T = (mu1 + mu2) / 2 + s^2 / (mu1 - mu2) ln(P2 / P1).
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import List, Tuple

import numpy as np

from ..errors import GeometryError, NoValidThresholdError
from ..imaging.histogram import LEVEL_VALUES, build_spatial
from ..imaging.images import BinaryImage, GrayImage, ThresholdMap
from .gaussian import BimodalMixture, lower_tail, upper_tail

logger = logging.getLogger(__name__)

EQUAL_SIGMA_TOLERANCE = 1e-9


class ThresholdMethod(Enum):
    """Which formula produced a threshold"""
    QUADRATIC_ROOT = "quadratic_root"
    EQUAL_SIGMA = "equal_sigma"
    EQUAL_PRIOR_MIDPOINT = "equal_prior_midpoint"


@dataclass(frozen=True)
class ThresholdResult:
    threshold: float
    expected_error: float
    method: ThresholdMethod


@dataclass(frozen=True)
class ClassificationError:
    """
    object_as_background: E1(T), object mass below T
    background_as_object: E2(T), background mass above T
    total: E(T) = P1 E2 + P2 E1
    """
    object_as_background: float
    background_as_object: float
    total: float


@dataclass(frozen=True)
class GlobalFit:
    mixture: BimodalMixture
    result: ThresholdResult
    fit_error: float


def misclassification_error(mixture: BimodalMixture, threshold: float) -> ClassificationError:
    bg, obj = mixture.background, mixture.object
    e1 = lower_tail(threshold, obj.mu, obj.sigma)
    e2 = upper_tail(threshold, bg.mu, bg.sigma)
    total = bg.prior * e2 + obj.prior * e1
    return ClassificationError(
        object_as_background=e1,
        background_as_object=e2,
        total=min(max(total, 0.0), 1.0),
    )


def _quadratic_roots(a: float, b: float, c: float) -> List[float]:
    discriminant = b * b - 4.0 * a * c
    if discriminant < 0:
        return []
    q = -0.5 * (b + math.copysign(math.sqrt(discriminant), b))
    if q == 0.0:
        return [-b / (2.0 * a)]
    return [q / a, c / q]


def solve_optimal(mixture: BimodalMixture) -> ThresholdResult:
    """Minimum-error threshold between the two modes"""
    bg, obj = mixture.background, mixture.object
    mu1, s1, p1 = bg.mu, bg.sigma, bg.prior
    mu2, s2, p2 = obj.mu, obj.sigma, obj.prior
    if not mu1 < mu2:
        raise NoValidThresholdError(f"Modes are not ordered: mu1={mu1}, mu2={mu2}")

    v1, v2 = s1 * s1, s2 * s2
    a = v1 - v2
    if abs(a) < EQUAL_SIGMA_TOLERANCE:
        if p1 == p2:
            threshold = 0.5 * (mu1 + mu2)
            method = ThresholdMethod.EQUAL_PRIOR_MIDPOINT
        else:
            variance = 0.5 * (v1 + v2)
            threshold = 0.5 * (mu1 + mu2) + variance / (mu1 - mu2) * math.log(p2 / p1)
            method = ThresholdMethod.EQUAL_SIGMA
        if not mu1 <= threshold <= mu2:
            raise NoValidThresholdError(
                f"Threshold {threshold:.6f} outside [{mu1:.6f}, {mu2:.6f}]", roots=(threshold,)
            )
    else:
        b = 2.0 * (mu1 * v2 - mu2 * v1)
        c = v1 * mu2 * mu2 - v2 * mu1 * mu1 + 2.0 * v1 * v2 * math.log((s2 * p1) / (s1 * p2))
        roots = _quadratic_roots(a, b, c)
        inside = [root for root in roots if mu1 <= root <= mu2]
        if not inside:
            raise NoValidThresholdError(
                f"No threshold root inside [{mu1:.6f}, {mu2:.6f}]: roots={roots}", roots=roots
            )
        threshold = min(inside, key=lambda root: misclassification_error(mixture, root).total)
        method = ThresholdMethod.QUADRATIC_ROOT

    error = misclassification_error(mixture, threshold).total
    logger.debug(f"Optimal threshold {threshold:.6f} ({method.value}), E={error:.3e}")
    return ThresholdResult(threshold=threshold, expected_error=error, method=method)


def overlap_error(mixture: BimodalMixture) -> float:
    """Overlapped probability mass, sum over levels of min(P1 p1, P2 p2)"""
    weighted_bg = mixture.background.weighted_pdf(LEVEL_VALUES)
    weighted_obj = mixture.object.weighted_pdf(LEVEL_VALUES)
    return float(np.minimum(weighted_bg, weighted_obj).sum())


def overlap_pixel_count(mixture: BimodalMixture, image_size: int) -> float:
    """Overlap expressed in pixels (areas A + B) for an image of image_size pixels"""
    return overlap_error(mixture) * image_size


def binarize(image: GrayImage, threshold: float) -> BinaryImage:
    """g(x, y) = 1 where f(x, y) > T, else 0"""
    return BinaryImage(image.pixels > threshold)


def binarize_with_map(image: GrayImage, threshold_map: ThresholdMap) -> BinaryImage:
    """Pointwise binarization against a per-pixel threshold surface"""
    if image.shape != threshold_map.shape:
        raise GeometryError(
            f"Image {image.width}x{image.height} does not match "
            f"threshold map {threshold_map.width}x{threshold_map.height}"
        )
    return BinaryImage(image.pixels > threshold_map.values)


def fit_global(image: GrayImage) -> GlobalFit:
    """Fit the image histogram and derive the optimal global threshold"""
    from .mixture import fit_bimodal, fit_quality

    histogram = build_spatial(image)
    mixture = fit_bimodal(histogram)
    fit_error = fit_quality(mixture, histogram)
    result = solve_optimal(mixture)
    logger.info(
        f"Global threshold {result.threshold:.6f} (E={result.expected_error:.3e}, M={fit_error:.3e})"
    )
    return GlobalFit(mixture=mixture.with_fit_error(fit_error), result=result, fit_error=fit_error)


def global_binarize(image: GrayImage) -> Tuple[BinaryImage, ThresholdResult]:
    fit = fit_global(image)
    return binarize(image, fit.result.threshold), fit.result
