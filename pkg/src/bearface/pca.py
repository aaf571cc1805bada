"""Principal-component reduction keeping a target fraction of variance.

The decomposition runs as an SVD of the centred sample matrix, which is
the covariance eigendecomposition carried out in the smaller of the
(dimension, sample count) spaces. Component signs are fixed so the entry
with the largest magnitude in each basis vector is positive, making fits
reproducible across runs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

DEFAULT_ENERGY = 0.95


class ZeroVarianceError(ValueError):
    """All samples identical; there is no variance to retain."""


@dataclass(frozen=True)
class PcaModel:
    """Mean, orthonormal basis columns, per-component variances."""

    mean: np.ndarray        # (d,)
    components: np.ndarray  # (d, k), orthonormal columns, variance order
    variances: np.ndarray   # (k,), non-increasing
    retained: float         # fraction of total variance kept
    energy: float           # requested fraction

    def __post_init__(self) -> None:
        for name in ("mean", "components", "variances"):
            array = np.ascontiguousarray(getattr(self, name), dtype=np.float64)
            array.setflags(write=False)
            object.__setattr__(self, name, array)

    @property
    def dimension(self) -> int:
        return self.components.shape[0]

    @property
    def k(self) -> int:
        return self.components.shape[1]


def fit_pca(samples: np.ndarray, energy: float = DEFAULT_ENERGY) -> PcaModel:
    """Fit a model keeping the smallest k with cumulative variance >= energy."""
    X = np.asarray(samples, dtype=np.float64)
    if X.ndim != 2:
        raise ValueError(f"samples must be 2-D (n, d), got shape {X.shape}")
    n, _ = X.shape
    if n < 2:
        raise ValueError("need at least 2 samples")
    if not (0.0 < energy <= 1.0):
        raise ValueError(f"energy must be in (0, 1], got {energy}")
    mean = X.mean(axis=0)
    centered = X - mean
    _, singular, vt = np.linalg.svd(centered, full_matrices=False)
    variances = singular**2 / (n - 1)
    total = float(variances.sum())
    if total <= 0.0:
        raise ZeroVarianceError("samples have zero variance; nothing to retain")
    ratios = np.cumsum(variances) / total
    k = int(np.searchsorted(ratios, energy - 1e-12, side="left")) + 1
    k = min(k, len(variances))
    components = vt[:k].T.copy()
    # Deterministic sign: largest-magnitude entry of each component positive.
    for j in range(k):
        pivot = int(np.argmax(np.abs(components[:, j])))
        if components[pivot, j] < 0:
            components[:, j] = -components[:, j]
    return PcaModel(
        mean=mean,
        components=components,
        variances=variances[:k],
        retained=float(ratios[k - 1]),
        energy=energy,
    )


def pca_project(model: PcaModel, x: np.ndarray) -> np.ndarray:
    """Coefficients of (x - mean) on the basis; accepts a vector or matrix."""
    array = np.asarray(x, dtype=np.float64)
    if array.shape[-1] != model.dimension:
        raise ValueError(
            f"input dimension {array.shape[-1]} does not match model "
            f"dimension {model.dimension}"
        )
    return (array - model.mean) @ model.components


def pca_reconstruct(model: PcaModel, coefficients: np.ndarray) -> np.ndarray:
    """Back-projection from coefficients to the original space."""
    array = np.asarray(coefficients, dtype=np.float64)
    if array.shape[-1] != model.k:
        raise ValueError(
            f"coefficient dimension {array.shape[-1]} does not match model "
            f"k {model.k}"
        )
    return array @ model.components.T + model.mean
