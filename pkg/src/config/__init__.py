"""
Configuration management package.
"""

from .config_manager import ConfigManager, get_config, reload_config
from .validator import ConfigValidator, validate_config
from .logging_config import setup_logging

__all__ = [
    'ConfigManager',
    'ConfigValidator',
    'get_config',
    'reload_config',
    'validate_config',
    'setup_logging',
]
