"""8-bit grayscale images and portable anymap I/O.

Only the binary formats are supported: P5 graymaps directly, P6 pixmaps
via the usual luma weights (0.299, 0.587, 0.114).
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np


@dataclass(frozen=True)
class GrayImage:
    """Row-major 8-bit intensity image."""

    pixels: np.ndarray  # (height, width) uint8

    def __post_init__(self) -> None:
        array = np.asarray(self.pixels)
        if array.ndim != 2:
            raise ValueError(f"image must be 2-D, got shape {array.shape}")
        if array.dtype != np.uint8:
            raise ValueError(f"image must be uint8, got {array.dtype}")
        array = np.ascontiguousarray(array)
        array.setflags(write=False)
        object.__setattr__(self, "pixels", array)

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @classmethod
    def from_array(cls, array: np.ndarray) -> "GrayImage":
        return cls(np.asarray(array, dtype=np.uint8))

    @classmethod
    def constant(cls, height: int, width: int, value: int = 0) -> "GrayImage":
        return cls(np.full((height, width), value, dtype=np.uint8))


def _read_pnm_tokens(data: bytes, count: int, offset: int) -> tuple[list[int], int]:
    """Read whitespace/comment-separated ASCII integers from a PNM header."""
    tokens: list[int] = []
    i = offset
    while len(tokens) < count:
        while i < len(data) and data[i : i + 1].isspace():
            i += 1
        if i < len(data) and data[i : i + 1] == b"#":
            while i < len(data) and data[i] != 0x0A:
                i += 1
            continue
        start = i
        while i < len(data) and not data[i : i + 1].isspace():
            i += 1
        if start == i:
            raise ValueError("truncated PNM header")
        tokens.append(int(data[start:i]))
    return tokens, i + 1  # skip the single whitespace after the last token


def read_pnm(path: str | Path) -> GrayImage:
    """Load a binary P5 graymap or P6 pixmap as grayscale."""
    data = Path(path).read_bytes()
    magic = data[:2]
    if magic not in (b"P5", b"P6"):
        raise ValueError(f"{path}: unsupported PNM magic {magic!r} (need P5/P6)")
    (width, height, maxval), offset = _read_pnm_tokens(data, 3, 2)
    if width <= 0 or height <= 0:
        raise ValueError(f"{path}: bad dimensions {width}x{height}")
    if not (0 < maxval <= 255):
        raise ValueError(f"{path}: only 8-bit data supported, maxval {maxval}")
    channels = 1 if magic == b"P5" else 3
    expected = width * height * channels
    if len(data) - offset < expected:
        raise ValueError(f"{path}: truncated raster")
    raster = np.frombuffer(data, dtype=np.uint8, count=expected, offset=offset)
    if channels == 1:
        gray = raster.reshape(height, width)
    else:
        rgb = raster.reshape(height, width, 3).astype(np.float64)
        luma = 0.299 * rgb[:, :, 0] + 0.587 * rgb[:, :, 1] + 0.114 * rgb[:, :, 2]
        gray = np.clip(np.round(luma), 0, 255).astype(np.uint8)
    return GrayImage(np.ascontiguousarray(gray))


def write_pgm(image: GrayImage, path: str | Path) -> None:
    """Write a binary P5 graymap."""
    header = f"P5\n{image.width} {image.height}\n255\n".encode("ascii")
    Path(path).write_bytes(header + image.pixels.tobytes())
