"""Basis kernels and Gram matrices for the classifier.

Two kernel families are supported: Gaussian RBF and polynomial. A kernel
bank pairs each kernel with a named feature block (e.g. RBF and polynomial
kernels on both the LBPH and HOG blocks), giving the M basis kernels the
weight learner combines.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np


@dataclass(frozen=True)
class RbfKernel:
    """k(x, z) = exp(-gamma * ||x - z||^2)."""

    gamma: float

    def __post_init__(self) -> None:
        if not self.gamma > 0:
            raise ValueError(f"rbf gamma must be positive, got {self.gamma}")


@dataclass(frozen=True)
class PolyKernel:
    """k(x, z) = (scale * <x, z> + offset) ** degree."""

    degree: int = 2
    offset: float = 1.0
    scale: float = 1.0

    def __post_init__(self) -> None:
        if self.degree < 1:
            raise ValueError(f"poly degree must be >= 1, got {self.degree}")
        if self.offset < 0:
            raise ValueError(f"poly offset must be >= 0, got {self.offset}")
        if not self.scale > 0:
            raise ValueError(f"poly scale must be positive, got {self.scale}")


@dataclass(frozen=True)
class AutoRbf:
    """RBF whose gamma is resolved from training data at fit time."""


KernelSpec = Union[RbfKernel, PolyKernel]
KernelPlan = Union[RbfKernel, PolyKernel, AutoRbf]


def _check_finite(X: np.ndarray, side: str) -> None:
    finite = np.isfinite(X)
    if not finite.all():
        index = int(np.nonzero(~finite.all(axis=tuple(range(1, X.ndim))))[0][0])
        raise ValueError(f"non-finite feature values in {side} sample {index}")


def kernel_matrix(
    spec: KernelSpec, X: np.ndarray, Z: np.ndarray | None = None
) -> np.ndarray:
    """Kernel evaluations k(x_i, z_j); Z = None gives the symmetric Gram."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    if X.size == 0:
        raise ValueError("empty feature set")
    _check_finite(X, "left")
    symmetric = Z is None
    Zm = X if symmetric else np.atleast_2d(np.asarray(Z, dtype=np.float64))
    if not symmetric:
        _check_finite(Zm, "right")
    if Zm.shape[1] != X.shape[1]:
        raise ValueError(
            f"feature dimensions differ: {X.shape[1]} vs {Zm.shape[1]}"
        )
    if isinstance(spec, RbfKernel):
        x_sq = np.sum(X * X, axis=1)
        z_sq = np.sum(Zm * Zm, axis=1)
        sq_dist = x_sq[:, None] + z_sq[None, :] - 2.0 * (X @ Zm.T)
        np.maximum(sq_dist, 0.0, out=sq_dist)
        K = np.exp(-spec.gamma * sq_dist)
    elif isinstance(spec, PolyKernel):
        K = (spec.scale * (X @ Zm.T) + spec.offset) ** spec.degree
    else:
        raise TypeError(f"unresolved kernel spec {spec!r}")
    if symmetric:
        K = 0.5 * (K + K.T)
    return K


def compute_gram(features: np.ndarray, spec: KernelSpec) -> np.ndarray:
    """Symmetric Gram matrix of one kernel over a sample set."""
    return kernel_matrix(spec, features)


def kernel_rows(
    spec: KernelSpec, train: np.ndarray, x: np.ndarray
) -> np.ndarray:
    """k(x_i, x) for one query point, as a 1-D vector over the training set."""
    return kernel_matrix(spec, train, np.atleast_2d(x))[:, 0]


def median_sq_distance(X: np.ndarray) -> float:
    """Median pairwise squared Euclidean distance over a sample set."""
    X = np.asarray(X, dtype=np.float64)
    n = X.shape[0]
    if n < 2:
        return 0.0
    sq = np.sum(X * X, axis=1)
    dist = sq[:, None] + sq[None, :] - 2.0 * (X @ X.T)
    upper = dist[np.triu_indices(n, k=1)]
    return float(np.median(np.maximum(upper, 0.0)))


def auto_gamma(X: np.ndarray) -> float:
    """Data-driven RBF width: 1 / (dimension * median pairwise sq distance)."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    dimension = max(1, X.shape[1])
    median = median_sq_distance(X)
    if median <= 0.0:
        return 1.0 / dimension
    return 1.0 / (dimension * median)


def resolve_kernel(plan: KernelPlan, X: np.ndarray) -> KernelSpec:
    """Turn a kernel plan into a concrete spec against training data."""
    if isinstance(plan, AutoRbf):
        return RbfKernel(gamma=auto_gamma(X))
    return plan


# ---------------------------------------------------------------------------
# Text round-trip (model files, config echo)
# ---------------------------------------------------------------------------


def format_kernel(spec: KernelSpec) -> str:
    if isinstance(spec, RbfKernel):
        return f"rbf gamma={spec.gamma!r}"
    return f"poly degree={spec.degree} offset={spec.offset!r} scale={spec.scale!r}"


def parse_kernel(text: str) -> KernelSpec:
    fields = text.split()
    if not fields:
        raise ValueError("empty kernel description")
    kind, params = fields[0], dict(f.split("=", 1) for f in fields[1:])
    if kind == "rbf":
        return RbfKernel(gamma=float(params["gamma"]))
    if kind == "poly":
        return PolyKernel(
            degree=int(params.get("degree", 2)),
            offset=float(params.get("offset", 1.0)),
            scale=float(params.get("scale", 1.0)),
        )
    raise ValueError(f"unknown kernel kind {kind!r}")


def combine_grams(grams: Sequence[np.ndarray], weights: np.ndarray) -> np.ndarray:
    """Convex combination sum_m d_m * K_m."""
    stacked = np.asarray(grams)
    return np.tensordot(np.asarray(weights, dtype=np.float64), stacked, axes=1)
