from dataclasses import replace

import numpy as np
import pytest

from src.errors import InvalidRegionSizeError, NoValidRegionError
from src.imaging.images import GrayImage
from src.simulation.acquisition import generate_stack, linear_illumination
from src.threshold.dynamic import (
    RegionStatus,
    default_region_size,
    dynamic_binarize,
    estimate_region_thresholds,
    fill_invalid_regions,
    interpolate_pixel_map,
    partition,
)
from src.threshold.global_threshold import global_binarize


def grid_with_thresholds(width, height, region_width, region_height, thresholds):
    """Partitioned blank image whose regions carry the given thresholds (NaN = pending)"""
    grid = partition(GrayImage(np.zeros((height, width), dtype=np.uint8)), region_width, region_height)
    thresholds = np.asarray(thresholds, dtype=float)
    records = tuple(
        tuple(
            replace(record, status=RegionStatus.PENDING, threshold=None)
            if np.isnan(thresholds[r, c])
            else replace(record, status=RegionStatus.VALID, threshold=float(thresholds[r, c]))
            for c, record in enumerate(row)
        )
        for r, row in enumerate(grid.records)
    )
    return replace(grid, records=records)


class TestPartition:
    def test_exact_tiling(self):
        grid = partition(GrayImage(np.zeros((256, 256), dtype=np.uint8)), 64, 64)
        assert (grid.rows, grid.cols) == (4, 4)
        assert all(record.region.area == 64 * 64 for row in grid.records for record in row)

    def test_linear_image_clips_last_region(self):
        grid = partition(GrayImage(np.zeros((1, 100), dtype=np.uint8)), 30, 1)
        assert [record.region.width for record in grid.records[0]] == [30, 30, 30, 10]

    def test_region_larger_than_image(self):
        with pytest.raises(InvalidRegionSizeError):
            partition(GrayImage(np.zeros((256, 256), dtype=np.uint8)), 300, 300)

    def test_region_below_minimum(self):
        with pytest.raises(InvalidRegionSizeError):
            partition(GrayImage(np.zeros((256, 256), dtype=np.uint8)), 4, 4)

    def test_default_sizes(self):
        assert default_region_size(GrayImage(np.zeros((1, 300), dtype=np.uint8))) == (128, 1)
        assert default_region_size(GrayImage(np.zeros((40, 300), dtype=np.uint8))) == (64, 40)
        assert default_region_size(GrayImage(np.zeros((1, 300), dtype=np.uint8)), linear_width=50) == (50, 1)


class TestEstimateRegionThresholds:
    def test_uniform_population_all_valid(self, bimodal_image):
        image = bimodal_image(256, 256)
        grid = estimate_region_thresholds(partition(image, 64, 64), 1e-4)
        assert grid.count(RegionStatus.VALID) == 16
        _, result = global_binarize(image)
        assert np.all(np.abs(grid.thresholds() - result.threshold) <= 2)

    def test_constant_region_pending(self):
        grid = estimate_region_thresholds(partition(GrayImage(np.full((16, 16), 90, dtype=np.uint8)), 16, 16))
        assert grid.record(0, 0).status is RegionStatus.PENDING
        assert np.isnan(grid.thresholds()[0, 0])
        assert np.isnan(grid.fit_errors()[0, 0])

    def test_accepted_regions_keep_fit_error(self, bimodal_image):
        pixels = np.array(bimodal_image(64, 32).pixels)
        pixels[:, 32:] = 200
        grid = estimate_region_thresholds(partition(GrayImage(pixels), 32, 32), 1e-4)
        fit_errors = grid.fit_errors()
        assert 0 <= fit_errors[0, 0] <= 1e-4
        assert np.isnan(fit_errors[0, 1])

    def test_half_constant_image(self, bimodal_image):
        pixels = np.array(bimodal_image(128, 64).pixels)
        pixels[:, 64:] = 200
        grid = estimate_region_thresholds(partition(GrayImage(pixels), 32, 32), 1e-4)
        statuses = np.array([[status.value for status in row] for row in grid.statuses()])
        assert np.all(statuses[:, :2] == RegionStatus.VALID.value)
        assert np.all(statuses[:, 2:] == RegionStatus.PENDING.value)


class TestFillInvalidRegions:
    def test_constant_neighbourhood(self):
        thresholds = np.full((3, 3), 100.0)
        thresholds[1, 1] = np.nan
        grid = fill_invalid_regions(grid_with_thresholds(24, 24, 8, 8, thresholds))
        assert grid.record(1, 1).status is RegionStatus.INTERPOLATED
        assert grid.record(1, 1).threshold == pytest.approx(100.0)

    def test_symmetric_neighbours(self):
        thresholds = np.full((3, 3), np.nan)
        thresholds[1, 0], thresholds[1, 2] = 90.0, 110.0
        grid = fill_invalid_regions(grid_with_thresholds(24, 24, 8, 8, thresholds))
        assert grid.record(1, 1).threshold == pytest.approx(100.0)
        assert not np.isnan(grid.thresholds()).any()

    def test_checkerboard_stays_in_range(self):
        rows, cols = np.indices((5, 5))
        thresholds = np.where((rows + cols) % 2 == 0, 80.0, 120.0)
        thresholds[[0, 2, 2, 4], [1, 2, 0, 3]] = np.nan
        grid = fill_invalid_regions(grid_with_thresholds(40, 40, 8, 8, thresholds))
        filled = grid.thresholds()
        assert np.all((filled >= 80) & (filled <= 120))
        assert grid.count(RegionStatus.INTERPOLATED) == 4

    def test_nothing_to_fill_from(self):
        with pytest.raises(NoValidRegionError):
            fill_invalid_regions(grid_with_thresholds(16, 16, 8, 8, np.full((2, 2), np.nan)))


class TestInterpolatePixelMap:
    def test_constant_field(self):
        threshold_map = interpolate_pixel_map(grid_with_thresholds(32, 24, 8, 8, np.full((3, 4), 100.0)))
        np.testing.assert_allclose(threshold_map.values, 100.0)

    def test_midpoint_between_two_centers(self):
        # region centers at x = 29.5 and x = 74.5
        threshold_map = interpolate_pixel_map(grid_with_thresholds(90, 8, 60, 8, [[100.0, 200.0]]))
        assert threshold_map.values[0, 52] == pytest.approx(150.0)
        assert threshold_map.values[0, 0] == pytest.approx(100.0)
        assert threshold_map.values[0, 89] == pytest.approx(200.0)

    def test_reproduces_knots(self, rng):
        thresholds = rng.uniform(50, 200, size=(3, 5))
        grid = grid_with_thresholds(45, 27, 9, 9, thresholds)
        values = interpolate_pixel_map(grid).values
        for r in range(3):
            for c in range(5):
                x, y = grid.record(r, c).center
                assert values[int(y), int(x)] == pytest.approx(thresholds[r, c], abs=1e-9)

    def test_pending_regions_rejected(self):
        thresholds = np.full((2, 2), 100.0)
        thresholds[0, 0] = np.nan
        with pytest.raises(NoValidRegionError):
            interpolate_pixel_map(grid_with_thresholds(16, 16, 8, 8, thresholds))


class TestDynamicBinarize:
    def test_agrees_with_global_under_uniform_illumination(self, bimodal_image):
        image = bimodal_image(256, 128)
        dynamic, _ = dynamic_binarize(image, (64, 64), 1e-4)
        global_result, _ = global_binarize(image)
        assert np.mean(dynamic.pixels == global_result.pixels) >= 0.99

    def test_beats_global_under_illumination_gradient(self, gradient_model):
        model = gradient_model.model_copy(update={'height': 64})
        simulated = generate_stack(model, 1)
        image = simulated.stack.frame(0)
        dynamic, threshold_map = dynamic_binarize(image, (32, 64), 1e-3)
        global_result, _ = global_binarize(image)
        dynamic_rate = np.mean(dynamic.pixels.astype(bool) != simulated.masks[0])
        global_rate = np.mean(global_result.pixels.astype(bool) != simulated.masks[0])
        assert dynamic_rate < global_rate
        assert threshold_map.values[0, -1] > threshold_map.values[0, 0]

    def test_constant_image(self):
        with pytest.raises(NoValidRegionError):
            dynamic_binarize(GrayImage(np.full((64, 64), 128, dtype=np.uint8)), (32, 32))

    def test_area_image_under_gradient(self, gradient_model):
        width = height = 512
        model = gradient_model.model_copy(update={
            'width': width, 'height': height, 'illumination_profile': linear_illumination(width, 0.3),
        })
        simulated = generate_stack(model, 1)
        image, truth = simulated.stack.frame(0), simulated.masks[0]
        dynamic, _ = dynamic_binarize(image, (64, 64), 1e-3)
        global_result, result = global_binarize(image)
        assert np.mean(dynamic.pixels.astype(bool) != truth) < np.mean(global_result.pixels.astype(bool) != truth)

        # a single region covering the image degrades to the global threshold
        whole, threshold_map = dynamic_binarize(image, (width, height), 1.0)
        np.testing.assert_array_equal(whole.pixels, global_result.pixels)
        assert np.all(threshold_map.values == result.threshold)

    def test_linear_image_default_regions(self, bimodal_image):
        image = bimodal_image(512, 1)
        binary, threshold_map = dynamic_binarize(image)
        assert binary.pixels.shape == (1, 512)
        assert threshold_map.shape == (1, 512)
