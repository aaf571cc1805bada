"""Gradient-orientation histograms over a window grid.

Gradients are central differences (one-sided at the borders). Orientation
is unsigned, folded into [0, pi), and each pixel votes with its gradient
magnitude, linearly split between the two nearest orientation anchors;
anchor i sits at i * pi / bins, and the split wraps circularly so
orientations near pi blend back into bin 0. Window histograms are
L2-normalized and concatenated.
"""

from __future__ import annotations

import numpy as np

from .imaging import GrayImage

DEFAULT_HOG_BINS = 59
_NORM_EPS = 1e-6


def gradient_field(pixels: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(magnitude, unsigned orientation in [0, pi)) per pixel."""
    image = np.asarray(pixels, dtype=np.float64)
    gy, gx = np.gradient(image)
    magnitude = np.hypot(gx, gy)
    orientation = np.mod(np.arctan2(gy, gx), np.pi)
    return magnitude, orientation


def hog(
    image: GrayImage, grid: tuple[int, int] = (8, 8), bins: int = DEFAULT_HOG_BINS
) -> np.ndarray:
    """Concatenated per-window orientation histograms.

    Feature length is grid_y * grid_x * bins (3776 for the default 8x8 grid
    and 59 bins on a 128x128 crop; pass bins=9 for the conventional
    variant). Each window is normalized to unit L2 norm with a small
    epsilon, so zero-gradient windows stay exactly zero.
    """
    if bins < 1:
        raise ValueError("bins must be at least 1")
    grid_y, grid_x = grid
    height, width = image.pixels.shape
    if height % grid_y or width % grid_x:
        raise ValueError(
            f"image {width}x{height} does not divide into a {grid_x}x{grid_y} grid"
        )
    win_h = height // grid_y
    win_w = width // grid_x

    magnitude, orientation = gradient_field(image.pixels)
    position = orientation * (bins / np.pi)
    lower = np.floor(position)
    fraction = position - lower
    bin_lo = lower.astype(np.int64) % bins
    bin_hi = (bin_lo + 1) % bins
    weight_lo = magnitude * (1.0 - fraction)
    weight_hi = magnitude * fraction

    feature = np.zeros(grid_y * grid_x * bins, dtype=np.float64)
    for wy in range(grid_y):
        for wx in range(grid_x):
            rows = slice(wy * win_h, (wy + 1) * win_h)
            cols = slice(wx * win_w, (wx + 1) * win_w)
            hist = np.bincount(
                bin_lo[rows, cols].ravel(),
                weights=weight_lo[rows, cols].ravel(),
                minlength=bins,
            )
            hist += np.bincount(
                bin_hi[rows, cols].ravel(),
                weights=weight_hi[rows, cols].ravel(),
                minlength=bins,
            )
            norm = np.linalg.norm(hist)
            if norm > 0:
                hist = hist / (norm + _NORM_EPS)
            start = (wy * grid_x + wx) * bins
            feature[start : start + bins] = hist
    return feature
