"""Uniform local binary pattern histograms over a window grid.

Every pixel is coded by comparing its 8 ring neighbours (radius 1) against
it: neighbour >= centre sets the bit. Codes whose circular bit string has
at most two 0/1 transitions are "uniform"; the 58 uniform codes get their
own histogram bins (in ascending code order) and everything else shares
one catch-all bin, for 59 bins per window.

Windows are independent: each window's histogram counts only the pixels
whose full 3x3 neighbourhood lies inside that window, so a 16x16 window
contributes exactly 14x14 codes no matter where it sits in the image.
"""

from __future__ import annotations

import numpy as np

from .imaging import GrayImage

#: Ring neighbours in clockwise order starting at the top-left corner;
#: neighbour p contributes bit value 2**p. The order is circular, which is
#: what makes the transition count meaningful.
NEIGHBOR_OFFSETS: tuple[tuple[int, int], ...] = (
    (-1, -1), (-1, 0), (-1, 1), (0, 1), (1, 1), (1, 0), (1, -1), (0, -1),
)

UNIFORM_BIN_COUNT = 59  # 58 uniform codes + 1 shared non-uniform bin


def circular_transitions(code: int) -> int:
    """Number of 0/1 changes when the 8-bit code is read as a ring."""
    rotated = ((code << 1) | (code >> 7)) & 0xFF
    return int(bin(code ^ rotated).count("1"))


def uniform_bin_table() -> np.ndarray:
    """Map from LBP code (0..255) to histogram bin (0..58)."""
    table = np.full(256, UNIFORM_BIN_COUNT - 1, dtype=np.int64)
    uniform_codes = [c for c in range(256) if circular_transitions(c) <= 2]
    for bin_index, code in enumerate(uniform_codes):
        table[code] = bin_index
    return table


_BIN_TABLE = uniform_bin_table()


def lbp_codes(pixels: np.ndarray) -> np.ndarray:
    """LBP codes of all pixels with a complete 3x3 neighbourhood.

    Input (h, w) yields (h-2, w-2); entry [i, j] codes pixel (i+1, j+1).
    """
    image = np.asarray(pixels)
    if image.ndim != 2 or image.shape[0] < 3 or image.shape[1] < 3:
        raise ValueError(f"need a 2-D image at least 3x3, got shape {image.shape}")
    center = image[1:-1, 1:-1]
    codes = np.zeros(center.shape, dtype=np.int64)
    height, width = image.shape
    for bit, (dy, dx) in enumerate(NEIGHBOR_OFFSETS):
        neighbor = image[1 + dy : height - 1 + dy, 1 + dx : width - 1 + dx]
        codes |= (neighbor >= center).astype(np.int64) << bit
    return codes


def lbph(image: GrayImage, grid: tuple[int, int] = (8, 8)) -> np.ndarray:
    """Concatenated per-window uniform-LBP histograms.

    The image is split into a grid_y x grid_x grid of equal, non-overlapping
    windows (image dimensions must divide evenly). Feature length is
    grid_y * grid_x * 59; with the default 8x8 grid on a 128x128 crop that
    is 3776. Histogram entries are raw counts.
    """
    grid_y, grid_x = grid
    height, width = image.pixels.shape
    if height % grid_y or width % grid_x:
        raise ValueError(
            f"image {width}x{height} does not divide into a {grid_x}x{grid_y} grid"
        )
    win_h = height // grid_y
    win_w = width // grid_x
    if win_h < 3 or win_w < 3:
        raise ValueError(f"windows of {win_w}x{win_h} px are too small for LBP")
    bins = _BIN_TABLE[lbp_codes(image.pixels)]
    feature = np.zeros(grid_y * grid_x * UNIFORM_BIN_COUNT, dtype=np.float64)
    for wy in range(grid_y):
        for wx in range(grid_x):
            window = bins[
                wy * win_h : wy * win_h + win_h - 2,
                wx * win_w : wx * win_w + win_w - 2,
            ]
            hist = np.bincount(window.ravel(), minlength=UNIFORM_BIN_COUNT)
            start = (wy * grid_x + wx) * UNIFORM_BIN_COUNT
            feature[start : start + UNIFORM_BIN_COUNT] = hist
    return feature
