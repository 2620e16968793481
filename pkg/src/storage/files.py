"""
Atomic file output.

Every writer goes through atomic_output: content lands in a temporary file
in the target directory and replaces the target only when the block
completes, so a failure never leaves a partial file behind.
"""

import logging
import os
import tempfile
from contextlib import contextmanager
from pathlib import Path
from typing import IO, Generator, Union

logger = logging.getLogger(__name__)

PathLike = Union[str, os.PathLike]

OUTPUT_MODE = 0o644


@contextmanager
def atomic_output(path: PathLike, mode: str = "w") -> Generator[IO, None, None]:
    """Context manager yielding a handle whose content is committed on success"""
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    encoding = None if "b" in mode else "utf-8"
    newline = None if "b" in mode else ""
    handle = tempfile.NamedTemporaryFile(
        mode=mode, encoding=encoding, newline=newline,
        dir=target.parent, prefix=f".{target.name}.", suffix=".tmp", delete=False,
    )
    try:
        with handle:
            yield handle
        # temporary files are created 0600; replaced targets keep their mode
        mode_bits = target.stat().st_mode & 0o777 if target.exists() else OUTPUT_MODE
        os.chmod(handle.name, mode_bits)
        os.replace(handle.name, target)
    except BaseException as e:
        Path(handle.name).unlink(missing_ok=True)
        logger.error(f"Write to {target} rolled back: {e}")
        raise
    logger.debug(f"Wrote {target}")
