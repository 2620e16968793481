"""
Binary PGM (P5) codec.

Only 8-bit P5 files with maxval 255 are supported. Header tokens are
separated by whitespace and may be interleaved with '#' comments; a single
whitespace byte separates the maxval from the raster. Binary images are
stored as 0/255 grayscale (1 -> 255).
"""

import logging
from pathlib import Path
from typing import List, Tuple

import numpy as np

from ..errors import FormatError
from ..imaging.images import MAX_LEVEL, BinaryImage, GrayImage
from .files import PathLike, atomic_output

logger = logging.getLogger(__name__)

MAGIC = b"P5"
WHITESPACE = b" \t\n\r\v\f"


def _header_tokens(data: bytes) -> Tuple[List[Tuple[bytes, int]], int]:
    """Four header tokens with their offsets, and the offset of the raster"""
    tokens = []
    position = 0
    while len(tokens) < 4:
        while position < len(data) and data[position] in WHITESPACE:
            position += 1
        if position < len(data) and data[position:position + 1] == b"#":
            newline = data.find(b"\n", position)
            if newline < 0:
                raise FormatError("Unterminated header comment", offset=position)
            position = newline + 1
            continue
        if position >= len(data):
            raise FormatError("Truncated header", offset=position)
        start = position
        while position < len(data) and data[position] not in WHITESPACE and data[position:position + 1] != b"#":
            position += 1
        tokens.append((data[start:position], start))

    if position >= len(data) or data[position] not in WHITESPACE:
        raise FormatError("Missing whitespace after maxval", offset=position)
    return tokens, position + 1


def _header_int(token: bytes, offset: int, name: str) -> int:
    if not token.isdigit():
        raise FormatError(f"Invalid {name} '{token.decode('latin-1')}'", offset=offset)
    return int(token)


def decode_pgm(data: bytes) -> GrayImage:
    if data[:2] != MAGIC:
        if data[:2] == b"P2":
            raise FormatError("ASCII PGM (P2) is not supported", offset=0)
        raise FormatError(f"Bad magic {data[:2]!r}, expected P5", offset=0)

    tokens, raster_start = _header_tokens(data)
    (magic, _), (width_token, width_at), (height_token, height_at), (maxval_token, maxval_at) = tokens
    if magic != MAGIC:
        raise FormatError(f"Bad magic {magic!r}, expected P5", offset=0)
    width = _header_int(width_token, width_at, "width")
    height = _header_int(height_token, height_at, "height")
    maxval = _header_int(maxval_token, maxval_at, "maxval")
    if maxval != MAX_LEVEL:
        raise FormatError(f"Unsupported maxval {maxval}, only {MAX_LEVEL} is accepted", offset=maxval_at)
    if width < 1 or height < 1:
        raise FormatError(f"Empty geometry {width}x{height}", offset=width_at)

    expected = width * height
    raster = data[raster_start:raster_start + expected]
    if len(raster) < expected:
        raise FormatError(f"Truncated raster: {len(raster)} of {expected} bytes", offset=raster_start + len(raster))
    if len(data) > raster_start + expected:
        logger.debug(f"Ignoring {len(data) - raster_start - expected} trailing byte(s)")

    pixels = np.frombuffer(raster, dtype=np.uint8).reshape(height, width)
    return GrayImage(pixels)


def encode_pgm(pixels: np.ndarray) -> bytes:
    pixels = np.asarray(pixels)
    if pixels.ndim != 2 or pixels.size == 0:
        raise FormatError(f"Cannot encode image of shape {pixels.shape}")
    height, width = pixels.shape
    header = b"%s\n%d %d\n%d\n" % (MAGIC, width, height, MAX_LEVEL)
    return header + np.ascontiguousarray(pixels, dtype=np.uint8).tobytes()


def read_pgm(path: PathLike) -> GrayImage:
    image = decode_pgm(Path(path).read_bytes())
    logger.debug(f"Read {image.width}x{image.height} PGM from {path}")
    return image


def write_pgm(path: PathLike, image: GrayImage) -> None:
    data = encode_pgm(image.pixels)
    with atomic_output(path, "wb") as handle:
        handle.write(data)


def write_binary_image(path: PathLike, image: BinaryImage) -> None:
    """Binary image as P5 PGM with object pixels at 255 and background at 0"""
    if image.pixels.size == 0:
        raise FormatError(f"Cannot write empty binary image of shape {image.pixels.shape}")
    data = encode_pgm(image.to_gray().pixels)
    with atomic_output(path, "wb") as handle:
        handle.write(data)
