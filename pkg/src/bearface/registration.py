"""Landmark-based face registration: similarity fit, warp, crop, resize.

68-point landmark sets are aligned to a reference shape with a
least-squares similarity transform (uniform scale, rotation, translation,
no reflection), then the face is resampled straight into a square crop of
the reference-space landmark bounding box.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .diagnostics import CropBoundsWarning
from .imaging import GrayImage

LANDMARK_COUNT = 68
CROP_SIZE = 128


class DegenerateLandmarksError(ValueError):
    """Landmark configuration with no spread; the fit is singular."""


@dataclass(frozen=True)
class LandmarkSet:
    """Exactly 68 (x, y) points in image pixel coordinates."""

    points: np.ndarray  # (68, 2) float64

    def __post_init__(self) -> None:
        array = np.asarray(self.points, dtype=np.float64)
        if array.shape != (LANDMARK_COUNT, 2):
            raise ValueError(
                f"landmark set must be ({LANDMARK_COUNT}, 2), got {array.shape}"
            )
        if not np.isfinite(array).all():
            raise ValueError("landmark coordinates must be finite")
        array = np.ascontiguousarray(array)
        array.setflags(write=False)
        object.__setattr__(self, "points", array)


def read_landmarks(path: str | Path) -> LandmarkSet:
    """Load an 'x y' per line landmark file (one per image, same stem)."""
    rows = []
    for number, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = line.split()
        if len(fields) != 2:
            raise ValueError(f"{path}:{number}: expected 'x y'")
        rows.append((float(fields[0]), float(fields[1])))
    if len(rows) != LANDMARK_COUNT:
        raise ValueError(f"{path}: expected {LANDMARK_COUNT} landmarks, got {len(rows)}")
    return LandmarkSet(np.asarray(rows))


def write_landmarks(landmarks: LandmarkSet, path: str | Path) -> None:
    lines = [f"{x:.6f} {y:.6f}" for x, y in landmarks.points]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


@dataclass(frozen=True)
class SimilarityTransform:
    """p -> scale * R(rotation) @ p + translation."""

    scale: float
    rotation: float  # radians
    translation: tuple[float, float]

    def __post_init__(self) -> None:
        if not self.scale > 0:
            raise ValueError(f"scale must be positive, got {self.scale}")

    def _complex(self) -> complex:
        return self.scale * complex(math.cos(self.rotation), math.sin(self.rotation))

    def apply(self, points: np.ndarray) -> np.ndarray:
        z = np.asarray(points, dtype=float)
        w = (z[..., 0] + 1j * z[..., 1]) * self._complex()
        w = w + complex(*self.translation)
        return np.stack([w.real, w.imag], axis=-1)

    def inverse(self) -> "SimilarityTransform":
        a = self._complex()
        b = -complex(*self.translation) / a
        return SimilarityTransform(
            scale=1.0 / self.scale,
            rotation=-self.rotation,
            translation=(b.real, b.imag),
        )


def fit_similarity(source: LandmarkSet, reference: LandmarkSet) -> SimilarityTransform:
    """Least-squares similarity mapping source points onto reference points.

    Closed form in the complex plane: with centred point sets s and r, the
    optimal rotation+scale is sum(r * conj(s)) / sum(|s|^2).
    """
    s = source.points[:, 0] + 1j * source.points[:, 1]
    r = reference.points[:, 0] + 1j * reference.points[:, 1]
    s_mean = s.mean()
    r_mean = r.mean()
    s_centered = s - s_mean
    denominator = float(np.sum(s_centered.real**2 + s_centered.imag**2))
    source_span = float(np.abs(s - s_mean).max(initial=0.0))
    if denominator <= (1e-12 * max(1.0, source_span)) ** 2 * LANDMARK_COUNT:
        raise DegenerateLandmarksError("source landmarks are all coincident")
    a = complex(np.sum((r - r_mean) * np.conj(s_centered)) / denominator)
    if a == 0:
        raise DegenerateLandmarksError("reference landmarks are all coincident")
    translation = r_mean - a * s_mean
    return SimilarityTransform(
        scale=abs(a),
        rotation=math.atan2(a.imag, a.real),
        translation=(translation.real, translation.imag),
    )


def mean_reference(
    landmark_sets: Sequence[LandmarkSet], size: int = CROP_SIZE
) -> LandmarkSet:
    """Mean landmark shape, uniformly rescaled and centred in a size^2 frame."""
    if not landmark_sets:
        raise ValueError("need at least one landmark set")
    mean = np.mean([ls.points for ls in landmark_sets], axis=0)
    low = mean.min(axis=0)
    high = mean.max(axis=0)
    extent = float((high - low).max())
    if extent <= 0:
        raise DegenerateLandmarksError("mean landmark shape has no spread")
    scale = (size - 1) / extent
    scaled = (mean - (low + high) / 2.0) * scale + (size - 1) / 2.0
    return LandmarkSet(scaled)


def _bilinear_sample(pixels: np.ndarray, x: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, bool]:
    """Sample at float coords (x cols, y rows); outside the image reads 0."""
    height, width = pixels.shape
    eps = 1e-9  # round-off from transform chains must not count as outside
    inside = (x >= -eps) & (x <= width - 1 + eps) & (y >= -eps) & (y <= height - 1 + eps)
    xs = np.clip(x, 0, width - 1)
    ys = np.clip(y, 0, height - 1)
    x0 = np.floor(xs).astype(int)
    y0 = np.floor(ys).astype(int)
    x1 = np.minimum(x0 + 1, width - 1)
    y1 = np.minimum(y0 + 1, height - 1)
    fx = xs - x0
    fy = ys - y0
    img = pixels.astype(np.float64)
    value = (
        img[y0, x0] * (1 - fx) * (1 - fy)
        + img[y0, x1] * fx * (1 - fy)
        + img[y1, x0] * (1 - fx) * fy
        + img[y1, x1] * fx * fy
    )
    value = np.where(inside, value, 0.0)
    return value, bool((~inside).any())


def register_and_crop(
    image: GrayImage,
    landmarks: LandmarkSet,
    reference: LandmarkSet,
    size: int = CROP_SIZE,
) -> GrayImage:
    """Warp a face onto the reference shape and crop it to size x size.

    The crop window is the bounding box of the reference landmarks; output
    pixel centres span it inclusively. Sampling is bilinear through the
    inverse similarity transform in a single pass (no intermediate
    full-frame warp). Samples falling outside the source image read as 0
    and raise a CropBoundsWarning.
    """
    transform = fit_similarity(landmarks, reference)
    low = reference.points.min(axis=0)
    high = reference.points.max(axis=0)
    if not (high > low).all():
        raise DegenerateLandmarksError("reference bounding box is empty")
    grid = np.arange(size)
    ref_x = low[0] + grid * (high[0] - low[0]) / (size - 1)
    ref_y = low[1] + grid * (high[1] - low[1]) / (size - 1)
    ref_points = np.stack(np.meshgrid(ref_x, ref_y), axis=-1)  # (size, size, 2)
    src = transform.inverse().apply(ref_points)
    values, clipped = _bilinear_sample(image.pixels, src[..., 0], src[..., 1])
    if clipped:
        warnings.warn(
            "crop window reaches outside the source image; missing pixels are 0",
            CropBoundsWarning,
            stacklevel=2,
        )
    return GrayImage.from_array(np.clip(np.round(values), 0, 255))
