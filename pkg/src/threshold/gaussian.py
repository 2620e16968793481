"""
Two-component Gaussian mixture model of a bimodal intensity distribution.

Component 1 is the (darker) background, component 2 the (brighter) object;
P1 + P2 = 1.
"""

import math
from dataclasses import dataclass, replace
from typing import Optional, Union

import numpy as np
from scipy.special import ndtr

from ..errors import BoundsError

SIGMA_FLOOR = 0.25
PRIOR_SUM_TOLERANCE = 1e-9

ArrayLike = Union[float, np.ndarray]


def normal_pdf(x: ArrayLike, mu: float, sigma: float) -> ArrayLike:
    z = (np.asarray(x, dtype=np.float64) - mu) / sigma
    return np.exp(-0.5 * z * z) / (math.sqrt(2.0 * math.pi) * sigma)


def lower_tail(x: float, mu: float, sigma: float) -> float:
    """Probability mass of N(mu, sigma) below x"""
    return float(ndtr((x - mu) / sigma))


def upper_tail(x: float, mu: float, sigma: float) -> float:
    """Probability mass of N(mu, sigma) above x"""
    return float(ndtr((mu - x) / sigma))


@dataclass(frozen=True)
class GaussianComponent:
    """One mode of the mixture: mean level, deviation in levels, a priori probability"""
    mu: float
    sigma: float
    prior: float

    def __post_init__(self) -> None:
        if not math.isfinite(self.mu):
            raise BoundsError(f"Component mean must be finite, got {self.mu}")
        if not (self.sigma >= SIGMA_FLOOR and math.isfinite(self.sigma)):
            raise BoundsError(f"Component sigma {self.sigma} below floor {SIGMA_FLOOR}")
        if not (0.0 < self.prior < 1.0):
            raise BoundsError(f"Component prior must lie in (0, 1), got {self.prior}")

    def pdf(self, x: ArrayLike) -> ArrayLike:
        return normal_pdf(x, self.mu, self.sigma)

    def weighted_pdf(self, x: ArrayLike) -> ArrayLike:
        return self.prior * normal_pdf(x, self.mu, self.sigma)


@dataclass(frozen=True)
class BimodalMixture:
    """p(x) = P1 p1(x) + P2 p2(x), with the histogram fit error M when known"""
    background: GaussianComponent
    object: GaussianComponent
    fit_error: Optional[float] = None

    def __post_init__(self) -> None:
        prior_sum = self.background.prior + self.object.prior
        if abs(prior_sum - 1.0) > PRIOR_SUM_TOLERANCE:
            raise BoundsError(f"Priors must sum to 1, got {prior_sum}")
        if self.background.mu > self.object.mu:
            raise BoundsError(
                f"Background mean {self.background.mu} above object mean {self.object.mu}"
            )

    @classmethod
    def from_parameters(cls, mu1: float, sigma1: float, mu2: float, sigma2: float,
                        object_prior: float) -> "BimodalMixture":
        return cls(
            background=GaussianComponent(mu1, sigma1, 1.0 - object_prior),
            object=GaussianComponent(mu2, sigma2, object_prior),
        )

    def pdf(self, x: ArrayLike) -> ArrayLike:
        return self.background.weighted_pdf(x) + self.object.weighted_pdf(x)

    def with_fit_error(self, fit_error: float) -> "BimodalMixture":
        return replace(self, fit_error=fit_error)

    def describe(self) -> str:
        return (
            f"background(mu={self.background.mu:.6f}, sigma={self.background.sigma:.6f}, "
            f"P={self.background.prior:.6f}) object(mu={self.object.mu:.6f}, "
            f"sigma={self.object.sigma:.6f}, P={self.object.prior:.6f})"
        )


def with_prior(mixture: BimodalMixture, object_prior: float) -> BimodalMixture:
    """Replace the fitted priors with a known object area ratio"""
    return BimodalMixture(
        background=replace(mixture.background, prior=1.0 - object_prior),
        object=replace(mixture.object, prior=object_prior),
    )
