"""Soft-margin SVM dual solver on a precomputed Gram matrix.

Sequential two-variable coordinate optimization: each step picks the
maximal-violating index and pairs it with the partner giving the best
second-order gain, then solves that two-variable subproblem exactly.
Convergence is declared when the largest KKT violation falls below the
tolerance. The bias comes from the free support vectors, or from the
midpoint of the bound constraints when none are free.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .diagnostics import NumericsWarning

DEFAULT_KKT_TOL = 1e-3
_PSD_FLOOR = -1e-8   # most negative eigenvalue tolerated without repair
_JITTER = 1e-8
_TAU = 1e-12


@dataclass(frozen=True)
class DualSolution:
    """Result of one dual solve."""

    alpha: np.ndarray
    bias: float
    objective: float      # sum(alpha) - 0.5 * alpha' Q alpha (maximized)
    kkt_violation: float
    iterations: int

    def __post_init__(self) -> None:
        array = np.ascontiguousarray(self.alpha, dtype=np.float64)
        array.setflags(write=False)
        object.__setattr__(self, "alpha", array)


def dual_objective(alpha: np.ndarray, K: np.ndarray, y: np.ndarray) -> float:
    """Value of the dual objective for given multipliers."""
    v = alpha * y
    return float(alpha.sum() - 0.5 * v @ K @ v)


def ensure_psd(K: np.ndarray) -> np.ndarray:
    """Add diagonal jitter when the matrix is meaningfully indefinite."""
    smallest = float(np.linalg.eigvalsh(K)[0])
    if smallest < _PSD_FLOOR:
        warnings.warn(
            f"combined kernel matrix has eigenvalue {smallest:.3e}; "
            f"adding diagonal jitter {_JITTER:g}",
            NumericsWarning,
            stacklevel=3,
        )
        K = K + _JITTER * np.eye(K.shape[0])
    return K


def solve_svm_dual(
    K: np.ndarray,
    y: np.ndarray,
    C: float,
    tol: float = DEFAULT_KKT_TOL,
    max_iter: int | None = None,
    warm_alpha: np.ndarray | None = None,
    psd_check: bool = True,
) -> DualSolution:
    """Maximize the box-constrained dual over a combined kernel matrix.

    `y` must contain both classes as +/-1. `warm_alpha`, when given, must be
    feasible (box and equality constraints); it seeds the solve, which makes
    repeated solves under slowly changing kernels cheap.
    """
    K = np.asarray(K, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    n = K.shape[0]
    if K.shape != (n, n):
        raise ValueError(f"kernel matrix must be square, got {K.shape}")
    if y.shape != (n,):
        raise ValueError(f"labels shape {y.shape} does not match matrix size {n}")
    if not np.all(np.isin(y, (-1.0, 1.0))):
        raise ValueError("labels must be -1 or +1")
    if (y > 0).all() or (y < 0).all():
        raise ValueError("both classes must be present")
    if C <= 0:
        raise ValueError(f"C must be positive, got {C}")
    if psd_check:
        K = ensure_psd(K)
    if max_iter is None:
        max_iter = max(20000, 200 * n)

    Q = (y[:, None] * y[None, :]) * K
    if warm_alpha is not None:
        alpha = np.clip(np.asarray(warm_alpha, dtype=np.float64).copy(), 0.0, C)
        gradient = Q @ alpha - 1.0
    else:
        alpha = np.zeros(n)
        gradient = -np.ones(n)

    diag = np.diag(Q).copy()
    iterations = 0
    violation = np.inf
    for iterations in range(1, max_iter + 1):
        yg = -y * gradient
        up = ((y > 0) & (alpha < C)) | ((y < 0) & (alpha > 0))
        low = ((y > 0) & (alpha > 0)) | ((y < 0) & (alpha < C))
        up_scores = np.where(up, yg, -np.inf)
        low_scores = np.where(low, yg, np.inf)
        i = int(np.argmax(up_scores))
        m_up = up_scores[i]
        m_low = float(low_scores.min())
        violation = m_up - m_low
        if violation < tol:
            break

        # Second-order partner selection among violating candidates.
        b_vec = m_up - yg
        eligible = low & (yg < m_up)
        a_vec = diag[i] + diag - 2.0 * y[i] * y * Q[i]
        a_vec = np.where(a_vec > 0, a_vec, _TAU)
        gain = np.where(eligible, (b_vec * b_vec) / a_vec, -np.inf)
        j = int(np.argmax(gain))

        # Exact two-variable update with box clipping.
        s = y[i] * y[j]
        e_i = y[i] * gradient[i]
        e_j = y[j] * gradient[j]
        eta = diag[i] + diag[j] - 2.0 * y[i] * y[j] * Q[i, j]
        if eta <= 0:
            eta = _TAU
        alpha_j_old = alpha[j]
        alpha_i_old = alpha[i]
        candidate = alpha_j_old + y[j] * (e_i - e_j) / eta
        if s < 0:
            lo = max(0.0, alpha_j_old - alpha_i_old)
            hi = min(C, C + alpha_j_old - alpha_i_old)
        else:
            lo = max(0.0, alpha_i_old + alpha_j_old - C)
            hi = min(C, alpha_i_old + alpha_j_old)
        alpha_j_new = min(hi, max(lo, candidate))
        alpha_i_new = alpha_i_old + s * (alpha_j_old - alpha_j_new)
        delta_i = alpha_i_new - alpha_i_old
        delta_j = alpha_j_new - alpha_j_old
        if delta_i == 0.0 and delta_j == 0.0:
            break  # no movable pair left at this precision
        alpha[i] = alpha_i_new
        alpha[j] = alpha_j_new
        gradient += Q[:, i] * delta_i + Q[:, j] * delta_j
    else:
        warnings.warn(
            f"dual solver hit the iteration cap ({max_iter}); "
            f"violation {violation:.3e}",
            NumericsWarning,
            stacklevel=2,
        )

    yg = -y * gradient
    eps = 1e-9 * C
    free = (alpha > eps) & (alpha < C - eps)
    if free.any():
        bias = float(yg[free].mean())
    else:
        up = ((y > 0) & (alpha < C)) | ((y < 0) & (alpha > 0))
        low = ((y > 0) & (alpha > 0)) | ((y < 0) & (alpha < C))
        hi = yg[up].max() if up.any() else 0.0
        lo = yg[low].min() if low.any() else 0.0
        bias = float(0.5 * (hi + lo))

    return DualSolution(
        alpha=alpha,
        bias=bias,
        objective=dual_objective(alpha, K, y),
        kkt_violation=float(max(violation, 0.0)),
        iterations=iterations,
    )
