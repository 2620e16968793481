"""
Thresholding methods: global minimum-error, dynamic (region based) and
temporal (per-pixel history based).
"""

from .gaussian import SIGMA_FLOOR, BimodalMixture, GaussianComponent, with_prior
from .global_threshold import (
    ClassificationError,
    GlobalFit,
    ThresholdMethod,
    ThresholdResult,
    binarize,
    binarize_with_map,
    fit_global,
    global_binarize,
    misclassification_error,
    overlap_error,
    overlap_pixel_count,
    solve_optimal,
)
from .mixture import (
    BimodalValidation,
    ValidationStatus,
    fit_bimodal,
    fit_quality,
    mixture_pdf,
    validate_bimodal,
)
from .dynamic import (
    RegionGrid,
    RegionStatus,
    default_region_size,
    dynamic_binarize,
    estimate_region_thresholds,
    fill_invalid_regions,
    interpolate_pixel_map,
    partition,
)
from .temporal import (
    GlobalComparison,
    PixelFlag,
    QualityReport,
    TemporalCalibration,
    apply,
    calibrate,
    compare_with_global,
    quality_report,
)

__all__ = [
    'SIGMA_FLOOR',
    'BimodalMixture',
    'GaussianComponent',
    'with_prior',
    'ClassificationError',
    'GlobalFit',
    'ThresholdMethod',
    'ThresholdResult',
    'binarize',
    'binarize_with_map',
    'fit_global',
    'global_binarize',
    'misclassification_error',
    'overlap_error',
    'overlap_pixel_count',
    'solve_optimal',
    'BimodalValidation',
    'ValidationStatus',
    'fit_bimodal',
    'fit_quality',
    'mixture_pdf',
    'validate_bimodal',
    'RegionGrid',
    'RegionStatus',
    'default_region_size',
    'dynamic_binarize',
    'estimate_region_thresholds',
    'fill_invalid_regions',
    'interpolate_pixel_map',
    'partition',
    'GlobalComparison',
    'PixelFlag',
    'QualityReport',
    'TemporalCalibration',
    'apply',
    'calibrate',
    'compare_with_global',
    'quality_report',
]
