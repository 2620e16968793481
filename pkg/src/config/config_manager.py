"""
Configuration manager that loads settings from environment variables.
"""

import os
from pathlib import Path
from typing import Any, Callable, Dict, Optional

from dotenv import load_dotenv

# Load environment variables from .env file
env_path = Path('.env')
if env_path.exists():
    load_dotenv(env_path)


def _env_number(name: str, default: str, cast: Callable[[str], Any]) -> Any:
    # unparsable values fall back to the default; ConfigValidator reports them
    try:
        return cast(os.getenv(name, default))
    except ValueError:
        return cast(default)


class ConfigManager:
    """Configuration manager for environment variables."""

    def __init__(self) -> None:
        self._config: Dict[str, Any] = self._load_config()

    def _load_config(self) -> Dict[str, Any]:
        """Load configuration from environment variables."""
        return {
            # Logging
            'log_level': os.getenv('LOG_LEVEL', 'INFO').upper(),
            'log_file': os.getenv('LOG_FILE', 'logs/binarization.log'),
            'debug': os.getenv('DEBUG', 'false').lower() == 'true',

            # Bimodal validation (fit quality M)
            'bimodal_tolerance': _env_number('BIMODAL_TOLERANCE', '1e-4', float),

            # Dynamic thresholding
            'region_width': _env_number('REGION_WIDTH', '64', int),
            'region_height': _env_number('REGION_HEIGHT', '64', int),
            'linear_region_width': _env_number('LINEAR_REGION_WIDTH', '128', int),

            # Temporal thresholding
            'min_frames': _env_number('MIN_FRAMES', '200', int),
            'error_tolerance': _env_number('ERROR_TOLERANCE', '1e-4', float),
            'fallback_sigmas': _env_number('FALLBACK_SIGMAS', '4.0', float),

            # Parallelism
            'workers': _env_number('WORKERS', '4', int),
        }

    def get(self, key: str, default: Any = None) -> Any:
        """Get configuration value."""
        return self._config.get(key, default)

    def get_all(self) -> Dict[str, Any]:
        """Get all configuration values."""
        return self._config.copy()

    @property
    def log_level(self) -> str:
        return self.get('log_level')

    @property
    def log_file(self) -> str:
        return self.get('log_file')

    @property
    def debug(self) -> bool:
        return self.get('debug')

    @property
    def bimodal_tolerance(self) -> float:
        return self.get('bimodal_tolerance')

    @property
    def region_width(self) -> int:
        return self.get('region_width')

    @property
    def region_height(self) -> int:
        return self.get('region_height')

    @property
    def linear_region_width(self) -> int:
        return self.get('linear_region_width')

    @property
    def min_frames(self) -> int:
        return self.get('min_frames')

    @property
    def error_tolerance(self) -> float:
        return self.get('error_tolerance')

    @property
    def fallback_sigmas(self) -> float:
        return self.get('fallback_sigmas')

    @property
    def workers(self) -> int:
        return self.get('workers')


# Global config instance
_config: Optional[ConfigManager] = None


def get_config() -> ConfigManager:
    """Get global configuration manager."""
    global _config
    if _config is None:
        _config = ConfigManager()
    return _config


def reload_config() -> ConfigManager:
    """Rebuild the global configuration from the current environment."""
    global _config
    _config = ConfigManager()
    return _config
