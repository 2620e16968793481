"""
Configuration validator for environment variables.
"""

import os
import sys
from pathlib import Path
from typing import Any, Callable, Dict, List


def _check_number(errors: List[str], name: str, default: str, cast: Callable[[str], Any],
                  accept: Callable[[Any], bool], requirement: str) -> None:
    raw = os.getenv(name, default)
    try:
        value = cast(raw)
    except ValueError:
        errors.append(f"{name} must be a valid {cast.__name__}, got '{raw}'")
        return
    if not accept(value):
        errors.append(f"Invalid {name} '{raw}'. {requirement}")


class ConfigValidator:
    """Validates configuration values."""

    @staticmethod
    def validate() -> Dict[str, Any]:
        """
        Validate configuration and return errors/warnings.

        Returns:
            Dict with 'errors' and 'warnings' lists, and 'valid' boolean
        """
        errors: List[str] = []
        warnings: List[str] = []

        # Validate log level
        log_level = os.getenv('LOG_LEVEL', 'INFO').upper()
        valid_levels = ['DEBUG', 'INFO', 'WARNING', 'ERROR', 'CRITICAL']
        if log_level not in valid_levels:
            errors.append(f"Invalid LOG_LEVEL '{log_level}'. Must be one of: {', '.join(valid_levels)}")

        _check_number(errors, 'BIMODAL_TOLERANCE', '1e-4', float, lambda v: v > 0, "Must be positive")
        _check_number(errors, 'ERROR_TOLERANCE', '1e-4', float, lambda v: v > 0, "Must be positive")
        _check_number(errors, 'FALLBACK_SIGMAS', '4.0', float, lambda v: v > 0, "Must be positive")
        _check_number(errors, 'REGION_WIDTH', '64', int, lambda v: v >= 1, "Must be at least 1")
        _check_number(errors, 'REGION_HEIGHT', '64', int, lambda v: v >= 1, "Must be at least 1")
        _check_number(errors, 'LINEAR_REGION_WIDTH', '128', int, lambda v: v >= 1, "Must be at least 1")
        _check_number(errors, 'MIN_FRAMES', '200', int, lambda v: v >= 1, "Must be at least 1")
        _check_number(errors, 'WORKERS', '4', int, lambda v: v >= 1, "Must be at least 1")

        # Small frame minimums make temporal fits unreliable (warning only)
        try:
            if int(os.getenv('MIN_FRAMES', '200')) < 100:
                warnings.append("MIN_FRAMES below 100 - temporal histograms will be sparse")
        except ValueError:
            pass

        # Check if log directory can be created
        log_file = os.getenv('LOG_FILE', 'logs/binarization.log')
        if log_file:
            try:
                Path(log_file).parent.mkdir(parents=True, exist_ok=True)
            except OSError as e:
                errors.append(f"Cannot create log directory: {e}")

        return {
            'errors': errors,
            'warnings': warnings,
            'valid': len(errors) == 0
        }


def validate_config() -> bool:
    """Validate configuration and report results on stderr."""
    result = ConfigValidator.validate()

    if result['errors']:
        print("Configuration errors:", file=sys.stderr)
        for error in result['errors']:
            print(f"  ERROR: {error}", file=sys.stderr)

    if result['warnings']:
        print("Configuration warnings:", file=sys.stderr)
        for warning in result['warnings']:
            print(f"  WARNING: {warning}", file=sys.stderr)

    return bool(result['valid'])
