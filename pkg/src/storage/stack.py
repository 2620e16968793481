"""
Frame stack directories: one PGM per frame plus manifest.json.

Synthetic stacks also carry their ground-truth masks as 0/255 PGMs. The
manifest is written after every frame so an interrupted write leaves no
readable stack.
"""

import json
import logging
from pathlib import Path
from typing import Optional

import numpy as np
from pydantic import ValidationError

from ..errors import FormatError, GeometryError, ManifestError
from ..imaging.images import BinaryImage, FrameStack, GrayImage
from .files import PathLike, atomic_output
from .models import Manifest
from .pgm import read_pgm, write_binary_image, write_pgm

logger = logging.getLogger(__name__)

MANIFEST_FILE = "manifest.json"
MASK_PATTERN = "mask_{index:05d}.pgm"


def read_manifest(path: PathLike) -> Manifest:
    path = Path(path)
    if path.is_dir():
        path = path / MANIFEST_FILE
    if not path.is_file():
        raise ManifestError(f"Manifest {path} not found")
    try:
        return Manifest.model_validate(json.loads(path.read_text(encoding="utf-8")))
    except (ValueError, ValidationError) as e:
        raise ManifestError(f"Invalid manifest {path}: {e}")


def _manifest_directory(path: PathLike) -> Path:
    path = Path(path)
    return path if path.is_dir() else path.parent


def _load_frame(directory: Path, name: str, manifest: Manifest) -> GrayImage:
    frame_path = directory / name
    if not frame_path.is_file():
        raise ManifestError(f"Frame '{name}' listed in manifest is missing", frame=name)
    try:
        image = read_pgm(frame_path)
    except FormatError as e:
        raise ManifestError(f"Frame '{name}' is unreadable: {e}", frame=name)
    if image.shape != (manifest.height, manifest.width):
        raise GeometryError(
            f"Frame '{name}' is {image.width}x{image.height}, manifest says {manifest.width}x{manifest.height}"
        )
    return image


def read_stack(path: PathLike) -> FrameStack:
    """Load the frames listed by a manifest (file or its directory) in manifest order"""
    manifest = read_manifest(path)
    directory = _manifest_directory(path)
    images = [_load_frame(directory, name, manifest) for name in manifest.frame_names()]
    logger.info(f"Read {manifest.frame_count} frame(s) of {manifest.width}x{manifest.height} from {directory}")
    return FrameStack.from_images(images, acquisition_speed=manifest.speed)


def read_masks(path: PathLike) -> Optional[np.ndarray]:
    """Ground-truth mask stack (L, H, W) as booleans, or None for captured stacks"""
    manifest = read_manifest(path)
    if manifest.mask_pattern is None:
        return None
    directory = _manifest_directory(path)
    masks = [_load_frame(directory, name, manifest).pixels > 127 for name in manifest.mask_names()]
    return np.stack(masks)


def write_stack(directory: PathLike, stack: FrameStack, masks: Optional[np.ndarray] = None,
                seed: Optional[int] = None) -> Path:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    if masks is not None and np.shape(masks) != stack.frames.shape:
        raise GeometryError(f"Masks {np.shape(masks)} do not match frames {stack.frames.shape}")

    manifest = Manifest(
        width=stack.width,
        height=stack.height,
        frame_count=stack.frame_count,
        speed=stack.acquisition_speed,
        mask_pattern=MASK_PATTERN if masks is not None else None,
        seed=seed,
    )
    for index, name in enumerate(manifest.frame_names()):
        write_pgm(directory / name, stack.frame(index))
    for index, name in enumerate(manifest.mask_names()):
        write_binary_image(directory / name, BinaryImage(np.asarray(masks[index], dtype=np.uint8)))

    manifest_path = directory / MANIFEST_FILE
    with atomic_output(manifest_path) as handle:
        handle.write(manifest.model_dump_json(by_alias=True, indent=2, exclude_none=True) + "\n")
    logger.info(f"Wrote {stack.frame_count} frame(s) to {directory}")
    return manifest_path
