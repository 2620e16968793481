"""
Image value types and intensity histograms.
"""

from .images import BinaryImage, FrameStack, GrayImage, Region, ThresholdMap
from .histogram import (
    ClassMoments,
    Histogram,
    build_spatial,
    build_temporal,
    mean_and_variance,
    normalize,
)

__all__ = [
    'BinaryImage',
    'FrameStack',
    'GrayImage',
    'Region',
    'ThresholdMap',
    'ClassMoments',
    'Histogram',
    'build_spatial',
    'build_temporal',
    'mean_and_variance',
    'normalize',
]
