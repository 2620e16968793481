"""
Shared fixtures: isolated configuration/logging, seeded random data and
small synthetic scenes.
"""

import logging
from pathlib import Path

import numpy as np
import pytest

from src.config.config_manager import reload_config
from src.imaging.images import GrayImage
from src.simulation.acquisition import SceneModel, generate_stack, linear_illumination

CONFIG_KEYS = (
    'LOG_LEVEL', 'LOG_FILE', 'DEBUG', 'BIMODAL_TOLERANCE', 'REGION_WIDTH', 'REGION_HEIGHT',
    'LINEAR_REGION_WIDTH', 'MIN_FRAMES', 'ERROR_TOLERANCE', 'WORKERS', 'FALLBACK_SIGMAS',
)

DATA_DIR = Path(__file__).resolve().parent.parent / "data"


@pytest.fixture(autouse=True)
def isolated_environment(monkeypatch):
    """Default configuration, no log file, root logger restored afterwards"""
    for key in CONFIG_KEYS:
        monkeypatch.delenv(key, raising=False)
    monkeypatch.setenv('LOG_FILE', '')
    root = logging.getLogger()
    handlers, level = root.handlers[:], root.level
    reload_config()
    yield
    root.handlers[:] = handlers
    root.setLevel(level)
    reload_config()


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def bimodal_pixels(rng):
    """Factory for integer pixels drawn from a two-Gaussian population"""
    def sample(count, mu1, sigma1, mu2, sigma2, object_prior):
        is_object = rng.random(count) < object_prior
        values = np.where(is_object,
                          rng.normal(mu2, sigma2, count),
                          rng.normal(mu1, sigma1, count))
        return np.clip(np.round(values), 0, 255).astype(np.uint8)
    return sample


@pytest.fixture
def bimodal_image(bimodal_pixels):
    """Factory for a (height, width) image of i.i.d. bimodal pixels"""
    def build(width, height, mu1=90.0, sigma1=6.0, mu2=150.0, sigma2=6.0, object_prior=0.5):
        pixels = bimodal_pixels(width * height, mu1, sigma1, mu2, sigma2, object_prior)
        return GrayImage(pixels.reshape(height, width))
    return build


@pytest.fixture
def calibration_csv():
    return DATA_DIR / "conveyor_speed_calibration.csv"


@pytest.fixture
def clean_model():
    """Well separated scene with no distortions"""
    return SceneModel(width=24, height=2, scene_level=40, object_level=180, noise_sigma=3.0,
                      object_fraction_min=0.3, object_fraction_max=0.3, seed=11)


@pytest.fixture
def gradient_model():
    """Scene whose +/-30% illumination gradient defeats a single global threshold"""
    width = 256
    return SceneModel(width=width, height=1, scene_level=80, object_level=140, noise_sigma=3.0,
                      illumination_profile=linear_illumination(width, 0.3), seed=5)


@pytest.fixture
def gradient_stack(gradient_model):
    return generate_stack(gradient_model, 300)
