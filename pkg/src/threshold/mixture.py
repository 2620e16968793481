"""
Mixture fitting and bimodality validation.

The estimator is an iterative hard split: start from the histogram mean,
take moments of the two classes on either side of the split, rebuild the
mixture from them and move the split to that mixture's optimal threshold,
until the split moves by less than half a level.
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

from ..errors import BoundsError, EmptyClassError, NoValidThresholdError, NotBimodalError
from ..imaging.histogram import LEVEL_VALUES, Histogram, mean_and_variance, normalize
from ..imaging.images import MAX_LEVEL
from .gaussian import SIGMA_FLOOR, ArrayLike, BimodalMixture, GaussianComponent
from .global_threshold import solve_optimal

logger = logging.getLogger(__name__)

MAX_ITERATIONS = 100
CONVERGENCE_STEP = 0.5
DEFAULT_TOLERANCE = 1e-4


class ValidationStatus(Enum):
    """Bimodality validation outcomes"""
    ACCEPTED = "accepted"
    NOT_BIMODAL = "not_bimodal"
    FIT_ERROR_TOO_LARGE = "fit_error_too_large"


@dataclass(frozen=True)
class BimodalValidation:
    """Outcome of validate_bimodal; mixture is set only when accepted"""
    status: ValidationStatus
    mixture: Optional[BimodalMixture] = None
    fit_error: Optional[float] = None
    message: Optional[str] = None

    @property
    def accepted(self) -> bool:
        return self.status is ValidationStatus.ACCEPTED


def mixture_pdf(mixture: BimodalMixture, x: ArrayLike) -> ArrayLike:
    return mixture.pdf(x)


def _split_mixture(histogram: Histogram, split: float) -> BimodalMixture:
    boundary = int(math.floor(split))
    if boundary < 0 or boundary >= MAX_LEVEL:
        raise EmptyClassError(f"Split {split:.3f} leaves a class empty")
    low = mean_and_variance(histogram, 0, boundary)
    high = mean_and_variance(histogram, boundary + 1, MAX_LEVEL)
    object_prior = high.mass
    return BimodalMixture(
        background=GaussianComponent(
            low.mean, max(math.sqrt(low.variance), SIGMA_FLOOR), 1.0 - object_prior
        ),
        object=GaussianComponent(
            high.mean, max(math.sqrt(high.variance), SIGMA_FLOOR), object_prior
        ),
    )


def fit_bimodal(histogram: Histogram, max_iterations: int = MAX_ITERATIONS) -> BimodalMixture:
    """Fit background and object components by iterative split-and-refit"""
    if histogram.occupied_bins < 2:
        split = mean_and_variance(histogram).mean if histogram.total else None
        raise NotBimodalError(
            f"Histogram occupies {histogram.occupied_bins} level(s); two are required",
            last_split=split,
        )

    split = mean_and_variance(histogram).mean
    for iteration in range(max_iterations):
        try:
            mixture = _split_mixture(histogram, split)
            next_split = solve_optimal(mixture).threshold
        except (EmptyClassError, BoundsError, NoValidThresholdError) as e:
            raise NotBimodalError(f"Split-and-refit failed at T={split:.3f}: {e}", last_split=split)

        logger.debug(f"Iteration {iteration}: split {split:.4f} -> {next_split:.4f}")
        if abs(next_split - split) < CONVERGENCE_STEP:
            return mixture
        split = next_split

    raise NotBimodalError(
        f"Split-and-refit did not converge in {max_iterations} iterations", last_split=split
    )


def fit_quality(mixture: BimodalMixture, histogram: Histogram) -> float:
    """M = mean over the 256 levels of (p(x_i) - h(x_i))^2"""
    observed = normalize(histogram)
    expected = mixture.pdf(LEVEL_VALUES)
    return float(np.mean((expected - observed) ** 2))


def validate_bimodal(histogram: Histogram, tolerance: float = DEFAULT_TOLERANCE) -> BimodalValidation:
    """Accept when the mixture fits and its fit error M is within tolerance"""
    if tolerance <= 0:
        raise ValueError(f"Tolerance must be positive, got {tolerance}")
    try:
        mixture = fit_bimodal(histogram)
    except NotBimodalError as e:
        return BimodalValidation(status=ValidationStatus.NOT_BIMODAL, message=str(e))

    fit_error = fit_quality(mixture, histogram)
    if fit_error > tolerance:
        return BimodalValidation(
            status=ValidationStatus.FIT_ERROR_TOO_LARGE,
            fit_error=fit_error,
            message=f"Fit error {fit_error:.3e} exceeds tolerance {tolerance:.3e}",
        )
    return BimodalValidation(
        status=ValidationStatus.ACCEPTED,
        mixture=mixture.with_fit_error(fit_error),
        fit_error=fit_error,
    )
