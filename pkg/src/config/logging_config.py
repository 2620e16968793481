"""
Logging configuration for the binarization toolkit.

Diagnostics go to stderr so command results on stdout stay clean.
"""

import logging
import logging.handlers
import sys
from pathlib import Path
from typing import Any, Dict

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
DATE_FORMAT = '%Y-%m-%d %H:%M:%S'
LOG_FILE_MAX_BYTES = 10 * 1024 * 1024
LOG_FILE_BACKUPS = 5


def _resolve_level(config: Dict[str, Any]) -> int:
    if config.get("debug", False):
        return logging.DEBUG
    name = str(config.get("log_level", "INFO")).upper()
    return getattr(logging, name, logging.INFO)


def setup_logging(config: Dict[str, Any]) -> None:
    """
    Route toolkit logs to stderr and, unless LOG_FILE is empty, to a rotating file.

    Calling it again replaces the handlers installed by the previous call.
    """
    level = _resolve_level(config)
    formatter = logging.Formatter(fmt=LOG_FORMAT, datefmt=DATE_FORMAT)

    root_logger = logging.getLogger()
    root_logger.handlers.clear()
    root_logger.setLevel(level)

    stderr_handler = logging.StreamHandler(sys.stderr)
    stderr_handler.setLevel(level)
    stderr_handler.setFormatter(formatter)
    root_logger.addHandler(stderr_handler)

    log_file = config.get("log_file", "logs/binarization.log")
    if not log_file:
        return
    try:
        Path(log_file).parent.mkdir(parents=True, exist_ok=True)
        rotating_handler = logging.handlers.RotatingFileHandler(
            filename=log_file,
            maxBytes=LOG_FILE_MAX_BYTES,
            backupCount=LOG_FILE_BACKUPS,
            encoding='utf-8',
        )
    except OSError as e:
        root_logger.warning(f"File logging disabled, cannot open {log_file}: {e}")
        return
    # calibration summaries are INFO; per-pixel DEBUG chatter stays on stderr
    rotating_handler.setLevel(max(level, logging.INFO))
    rotating_handler.setFormatter(formatter)
    root_logger.addHandler(rotating_handler)
