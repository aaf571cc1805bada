"""Learning convex kernel-combination weights jointly with the SVM dual.

For M basis Gram matrices the trainer alternates an exact inner dual solve
at fixed weights d with an outer descent step on d over the probability
simplex. The outer step is second order: the curvature of the outer
objective is recovered from the sensitivity of the free dual variables to
d (a bordered KKT solve), and a constrained Newton direction is taken when
that system is well behaved, otherwise plain projected gradient. Either
way a backtracking line search only ever accepts weights that do not
increase the objective, so the recorded objective sequence is
non-increasing by construction.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .svm import DualSolution, ensure_psd, solve_svm_dual
from .kernels import combine_grams

DEFAULT_C = 10.0
STEP_TOL = 1e-4          # sup-norm of the accepted weight step
OBJECTIVE_TOL = 1e-6     # accepted objective decrease
MAX_OUTER_ITERATIONS = 100
_SUPPORT_EPS = 1e-9
_BACKTRACK_LIMIT = 25


def project_simplex(v: np.ndarray) -> np.ndarray:
    """Euclidean projection onto {d : d >= 0, sum(d) = 1}."""
    v = np.asarray(v, dtype=np.float64)
    if v.ndim != 1 or v.size == 0:
        raise ValueError("need a non-empty 1-D vector")
    descending = np.sort(v)[::-1]
    cumulative = np.cumsum(descending) - 1.0
    indices = np.arange(1, v.size + 1)
    mask = descending - cumulative / indices > 0
    rho = int(np.nonzero(mask)[0][-1]) + 1
    theta = cumulative[rho - 1] / rho
    return np.maximum(v - theta, 0.0)


def mkl_gradient(
    alpha: np.ndarray, y: np.ndarray, grams: Sequence[np.ndarray]
) -> np.ndarray:
    """d(objective)/d(d_m) = -0.5 * sum_ij alpha_i alpha_j y_i y_j K^m_ij."""
    v = alpha * y
    return np.asarray([-0.5 * float(v @ K @ v) for K in grams])


@dataclass(frozen=True)
class BinaryMklSolution:
    """One trained pairwise classifier with learned kernel weights."""

    class_a: int
    class_b: int
    alphas: np.ndarray          # dual variables per training sample
    kernel_weights: np.ndarray  # d over the M basis kernels, on the simplex
    bias: float
    labels: np.ndarray          # +/-1 per training sample (+1 = class_a)
    C: float
    objective: float
    history: tuple[tuple[tuple[float, ...], float], ...] = field(default=())

    def __post_init__(self) -> None:
        for name in ("alphas", "kernel_weights", "labels"):
            array = np.ascontiguousarray(getattr(self, name), dtype=np.float64)
            array.setflags(write=False)
            object.__setattr__(self, name, array)

    @property
    def support_indices(self) -> np.ndarray:
        # Relative cutoff: dual magnitudes scale inversely with the kernel
        # magnitude, so an absolute threshold would misfire on large grams.
        cutoff = _SUPPORT_EPS * float(self.alphas.max(initial=0.0))
        return np.nonzero(self.alphas > cutoff)[0]

    def validate(self, atol_equality: float = 1e-8, atol_simplex: float = 1e-10) -> None:
        """Raise if the dual/simplex feasibility invariants are broken."""
        if (self.alphas < -1e-12).any() or (self.alphas > self.C + 1e-12).any():
            raise AssertionError("dual variables leave the box [0, C]")
        if abs(float(self.alphas @ self.labels)) > atol_equality:
            raise AssertionError("dual equality constraint violated")
        if (self.kernel_weights < 0).any():
            raise AssertionError("negative kernel weight")
        if abs(float(self.kernel_weights.sum()) - 1.0) > atol_simplex:
            raise AssertionError("kernel weights do not sum to one")


def _curvature_direction(
    grams: Sequence[np.ndarray],
    weights: np.ndarray,
    y: np.ndarray,
    alpha: np.ndarray,
    C: float,
    gradient: np.ndarray,
) -> np.ndarray | None:
    """Constrained Newton direction from the KKT sensitivity of the duals.

    On the face where the free support set is fixed, the derivative of the
    free duals with respect to each weight solves a bordered system in the
    combined kernel; this yields the outer Hessian H and the direction
    minimizing g'D + 0.5 D'HD subject to sum(D) = 0. Returns None when the
    system is degenerate or ill-conditioned.
    """
    M = len(grams)
    eps = 1e-9 * C
    free = (alpha > eps) & (alpha < C - eps)
    count = int(free.sum())
    if count == 0:
        return None
    v = alpha * y
    # u_m = (yy' o K^m) alpha restricted to the free set.
    U = np.stack([y[free] * (K[free] @ v) for K in grams], axis=1)  # (F, M)
    combined = combine_grams(grams, weights)
    # The bordered KKT matrix uses the current combined kernel on the free set.
    Q_ff = (y[free, None] * y[None, free]) * combined[np.ix_(free, free)]
    S = np.zeros((count + 1, count + 1))
    S[:count, :count] = Q_ff
    S[:count, count] = y[free]
    S[count, :count] = y[free]
    try:
        solved = np.linalg.solve(S, np.vstack([U, np.zeros((1, M))]))
    except np.linalg.LinAlgError:
        return None
    if not np.isfinite(solved).all():
        return None
    H = U.T @ solved[:count]            # (M, M)
    H = 0.5 * (H + H.T)
    ridge = 1e-10 * max(1.0, float(np.trace(H)) / max(M, 1))
    system = np.zeros((M + 1, M + 1))
    system[:M, :M] = H + ridge * np.eye(M)
    system[:M, M] = 1.0
    system[M, :M] = 1.0
    rhs = np.concatenate([-gradient, [0.0]])
    try:
        step = np.linalg.solve(system, rhs)[:M]
    except np.linalg.LinAlgError:
        return None
    if not np.isfinite(step).all():
        return None
    return step


def train_binary_mkl(
    grams: Sequence[np.ndarray],
    labels: np.ndarray,
    C: float = DEFAULT_C,
    *,
    class_a: int = 0,
    class_b: int = 1,
    inner_tol: float = 1e-3,
    step_tol: float = STEP_TOL,
    objective_tol: float = OBJECTIVE_TOL,
    max_outer: int = MAX_OUTER_ITERATIONS,
    include_bias: bool = True,
) -> BinaryMklSolution:
    """Fit kernel weights and dual variables for one binary problem.

    Weights start uniform at 1/M. Identical basis kernels make the
    objective flat in d, in which case training simply converges at the
    barycenter. The returned history logs (weights, objective) for the
    initial point and every accepted step.
    """
    if not grams:
        raise ValueError("need at least one Gram matrix")
    grams = [ensure_psd(np.asarray(K, dtype=np.float64)) for K in grams]
    n = grams[0].shape[0]
    for K in grams:
        if K.shape != (n, n):
            raise ValueError("Gram matrices must share one square shape")
    y = np.asarray(labels, dtype=np.float64)
    M = len(grams)
    d = np.full(M, 1.0 / M)

    def inner(weights: np.ndarray, warm: np.ndarray | None) -> DualSolution:
        combined = combine_grams(grams, weights)
        return solve_svm_dual(
            combined, y, C, tol=inner_tol, warm_alpha=warm, psd_check=False
        )

    solution = inner(d, None)
    objective = solution.objective
    history: list[tuple[tuple[float, ...], float]] = [(tuple(d), objective)]

    for _ in range(max_outer):
        gradient = mkl_gradient(solution.alpha, y, grams)
        newton = _curvature_direction(grams, d, y, solution.alpha, C, gradient)
        gradient_step = -gradient * (0.5 / max(float(np.abs(gradient).max()), 1e-12))
        directions = [newton, gradient_step] if newton is not None else [gradient_step]

        accepted = None
        for direction in directions:
            scale = 1.0
            for _ in range(_BACKTRACK_LIMIT):
                candidate = project_simplex(d + scale * direction)
                if float(np.abs(candidate - d).max()) < 1e-15:
                    break
                trial = inner(candidate, solution.alpha)
                if trial.objective <= objective + 1e-12 * (1.0 + abs(objective)):
                    accepted = (candidate, trial)
                    break
                scale *= 0.5
            if accepted is not None:
                break
        if accepted is None:
            break  # no feasible descent direction: converged

        d_new, solution = accepted
        step_size = float(np.abs(d_new - d).max())
        decrease = objective - solution.objective
        d = d_new
        objective = solution.objective
        history.append((tuple(d), objective))
        if step_size < step_tol or decrease < objective_tol:
            break

    return BinaryMklSolution(
        class_a=class_a,
        class_b=class_b,
        alphas=solution.alpha,
        kernel_weights=d,
        bias=solution.bias if include_bias else 0.0,
        labels=y,
        C=C,
        objective=objective,
        history=tuple(history),
    )


def decision_value(
    solution: BinaryMklSolution, kernel_rows: Sequence[np.ndarray]
) -> float:
    """Discriminant h(x) = sum_m d_m sum_i alpha_i y_i k^m(x_i, x) + bias.

    `kernel_rows` holds one vector per basis kernel, evaluated between every
    training sample of this binary problem and the query point.
    """
    M = len(solution.kernel_weights)
    if len(kernel_rows) != M:
        raise ValueError(f"need {M} kernel rows, got {len(kernel_rows)}")
    n = solution.alphas.shape[0]
    v = solution.alphas * solution.labels
    total = 0.0
    for weight, row in zip(solution.kernel_weights, kernel_rows):
        row = np.asarray(row, dtype=np.float64)
        if row.shape != (n,):
            raise ValueError(
                f"kernel row covers {row.shape} samples, expected ({n},)"
            )
        total += float(weight) * float(row @ v)
    return total + solution.bias
