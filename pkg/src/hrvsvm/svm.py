"""Binary soft-margin SVM: kernels, SMO dual solver, bias recovery, decision function."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import (
    ConflictingLabelsError,
    DimensionError,
    SingleClassError,
    UnsupportedKernelError,
)

KERNEL_KINDS = ("linear", "gaussian", "polynomial")
_KIND_CODES = {"linear": kernels.LINEAR, "gaussian": kernels.GAUSSIAN, "polynomial": kernels.POLYNOMIAL}

SUPPORT_EPS = kernels.BOUND_EPS


@dataclass(frozen=True)
class KernelSpec:
    kind: str = "gaussian"
    sigma: float = 1.0
    degree: int = 3
    coef0: float = 1.0

    def __post_init__(self):
        if self.kind not in _KIND_CODES:
            raise ValueError(f"unknown kernel kind {self.kind!r}; expected one of {KERNEL_KINDS}")
        if not (self.sigma > 0 and math.isfinite(self.sigma)):
            raise ValueError("gaussian sigma must be a positive finite number")
        if int(self.degree) != self.degree or self.degree < 1:
            raise ValueError("polynomial degree must be an integer >= 1")
        if not math.isfinite(self.coef0):
            raise ValueError("coef0 must be finite")

    @property
    def code(self) -> int:
        return _KIND_CODES[self.kind]

    def row(self, points: np.ndarray, x: np.ndarray) -> np.ndarray:
        """K(points[i], x) for every row of ``points``."""
        if self.kind == "gaussian":
            diff = points - x
            return np.exp(-np.einsum("ij,ij->i", diff, diff) / (2.0 * self.sigma**2))
        dots = points @ x
        if self.kind == "linear":
            return dots
        return (dots + self.coef0) ** self.degree


def _as_vector(x) -> np.ndarray:
    return np.atleast_1d(np.asarray(x, dtype=np.float64))


def kernel_eval(k: KernelSpec, x, y) -> float:
    x = _as_vector(x)
    y = _as_vector(y)
    if x.shape != y.shape:
        raise DimensionError(f"kernel arguments differ in dimension: {x.shape[0]} vs {y.shape[0]}")
    if k.kind == "gaussian":
        d = x - y
        return math.exp(-float(d @ d) / (2.0 * k.sigma**2))
    dot = float(x @ y)
    if k.kind == "linear":
        return dot
    return (dot + k.coef0) ** k.degree


def _as_points(points) -> np.ndarray:
    try:
        arr = np.asarray(points, dtype=np.float64)
    except ValueError as exc:
        raise DimensionError("points have inconsistent dimensions") from exc
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2:
        raise DimensionError("points must be a sequence of equal-length vectors")
    return arr


def gram_matrix(k: KernelSpec, points) -> np.ndarray:
    pts = _as_points(points)
    if pts.shape[0] == 0:
        raise ValueError("gram_matrix needs at least one point")
    return kernels.gram(np.ascontiguousarray(pts), k.code, float(k.sigma), int(k.degree), float(k.coef0))


@dataclass(frozen=True)
class TrainingSet:
    points: np.ndarray
    labels: np.ndarray

    def __init__(self, points, labels):
        pts = _as_points(points)
        y = np.asarray(labels, dtype=np.float64).ravel()
        if pts.shape[0] == 0:
            raise ValueError("training set is empty")
        if pts.shape[0] != y.shape[0]:
            raise DimensionError(f"{pts.shape[0]} points but {y.shape[0]} labels")
        if not np.all(np.isfinite(pts)):
            raise ValueError("training points must be finite")
        if not np.all((y == 1) | (y == -1)):
            raise ValueError("labels must be +1 or -1")
        if not (np.any(y == 1) and np.any(y == -1)):
            raise SingleClassError()
        seen: dict[bytes, float] = {}
        for i, row in enumerate(pts):
            key = row.tobytes()
            if key in seen and seen[key] != y[i]:
                raise ConflictingLabelsError(f"point {i} duplicates an earlier point with the opposite label")
            seen[key] = y[i]
        pts.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "labels", y)

    @property
    def count(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]


@dataclass(frozen=True)
class DualSolution:
    alphas: np.ndarray
    bias: float
    objective_value: float
    kernel: KernelSpec
    c_bound: float
    iterations: int
    converged: bool
    updates: int = 0
    trace: np.ndarray = field(default_factory=lambda: np.zeros(0), repr=False)


def dual_objective(alphas, labels, gram) -> float:
    """sum(alpha) - 1/2 sum_ij alpha_i alpha_j y_i y_j K_ij"""
    ay = np.asarray(alphas) * np.asarray(labels)
    return float(np.sum(alphas) - 0.5 * ay @ gram @ ay)


def _bias_from_outputs(alphas, y, f0, c_bound) -> float:
    margin = (alphas > SUPPORT_EPS) & (alphas < c_bound - SUPPORT_EPS)
    if np.any(margin):
        return float(np.mean(y[margin] - f0[margin]))
    # no free multiplier: put the threshold midway between the classes
    return float(-(np.max(f0[y < 0]) + np.min(f0[y > 0])) / 2.0)


def compute_bias(sol: DualSolution, ts: TrainingSet) -> float:
    """Average of y_i - sum_j a_j y_j K(x_j, x_i) over margin support vectors.

    Falls back to the midpoint between the largest negative-class and the
    smallest positive-class bias-free output when every multiplier sits at a
    bound.
    """
    gram = gram_matrix(sol.kernel, ts.points)
    f0 = gram @ (sol.alphas * ts.labels)
    return _bias_from_outputs(sol.alphas, ts.labels, f0, sol.c_bound)


def solve_dual(
    ts: TrainingSet,
    k: KernelSpec | None = None,
    c_bound: float = 1000.0,
    kkt_tol: float = 1e-3,
    max_passes: int = 10000,
    trace: bool = False,
) -> DualSolution:
    """Maximise the kernelised dual by SMO pair updates.

    The returned multipliers are always feasible; ``converged`` is False when
    ``max_passes`` sweeps ran out before every KKT condition held within
    ``kkt_tol``. With ``trace=True`` the dual objective after each accepted
    pair update is kept on the solution.
    """
    k = k or KernelSpec()
    if not (c_bound > 0 and math.isfinite(c_bound)):
        raise ValueError("c_bound must be positive and finite")
    if not kkt_tol > 0:
        raise ValueError("kkt_tol must be positive")
    if max_passes < 1:
        raise ValueError("max_passes must be >= 1")
    gram = gram_matrix(k, ts.points)
    y = np.ascontiguousarray(ts.labels, dtype=np.float64)
    alphas, _, passes, updates, converged, obj_trace = kernels.smo(
        gram, y, float(c_bound), float(kkt_tol), int(max_passes), 1e-12, bool(trace)
    )
    alphas = np.clip(np.asarray(alphas, dtype=np.float64), 0.0, c_bound)
    f0 = gram @ (alphas * y)
    if not np.any(alphas > 0):
        raise SingleClassError("solver returned all-zero multipliers")
    return DualSolution(
        alphas=alphas,
        bias=_bias_from_outputs(alphas, y, f0, c_bound),
        objective_value=dual_objective(alphas, y, gram),
        kernel=k,
        c_bound=float(c_bound),
        iterations=int(passes),
        converged=bool(converged),
        updates=int(updates),
        trace=np.asarray(obj_trace),
    )


@dataclass(frozen=True)
class Normalizer:
    """Per-feature z-score transform."""

    means: tuple[float, ...]
    stds: tuple[float, ...]

    def __post_init__(self):
        if len(self.means) != len(self.stds):
            raise ValueError("means and stds differ in length")
        if not all(s > 0 and math.isfinite(s) for s in self.stds):
            raise ValueError("normalizer std must be positive and finite")

    def apply(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if x.shape[-1] != len(self.means):
            raise DimensionError(f"expected {len(self.means)} features, got {x.shape[-1]}")
        return (x - np.asarray(self.means)) / np.asarray(self.stds)


@dataclass(frozen=True)
class Model:
    support_points: np.ndarray
    support_labels: np.ndarray
    support_alphas: np.ndarray
    bias: float
    kernel: KernelSpec
    normalizer: Normalizer | None = None
    task: str | None = None
    c_bound: float = 1000.0
    converged: bool = True

    @property
    def dim(self) -> int:
        return self.support_points.shape[1]


def build_model(
    sol: DualSolution,
    ts: TrainingSet,
    normalizer: Normalizer | None = None,
    task: str | None = None,
) -> Model:
    """Keep only multipliers above 1e-8 as support vectors."""
    keep = sol.alphas > SUPPORT_EPS
    return Model(
        support_points=ts.points[keep].copy(),
        support_labels=ts.labels[keep].copy(),
        support_alphas=sol.alphas[keep].copy(),
        bias=sol.bias,
        kernel=sol.kernel,
        normalizer=normalizer,
        task=task,
        c_bound=sol.c_bound,
        converged=sol.converged,
    )


def decision_value(m: Model, x) -> float:
    x = _as_vector(x)
    if m.normalizer is not None:
        x = m.normalizer.apply(x)
    if x.shape[0] != m.dim:
        raise DimensionError(f"model expects {m.dim} features, got {x.shape[0]}")
    row = m.kernel.row(m.support_points, x)
    return float(np.sum(m.support_alphas * m.support_labels * row) + m.bias)


def sign_label(value: float) -> int:
    """+1 for strictly positive decision values, -1 otherwise (zero counts as healthy)."""
    return 1 if value > 0 else -1


def classify(m: Model, x) -> int:
    return sign_label(decision_value(m, x))


def primal_weights(sol: DualSolution, ts: TrainingSet) -> np.ndarray:
    if sol.kernel.kind != "linear":
        raise UnsupportedKernelError(f"{sol.kernel.kind} kernel has no explicit weight vector")
    return (sol.alphas * ts.labels) @ ts.points


def linear_margin(sol: DualSolution, ts: TrainingSet) -> float:
    """Geometric margin 2 / ||w|| of a linear-kernel solution."""
    return 2.0 / float(np.linalg.norm(primal_weights(sol, ts)))


def train_svm(
    points,
    labels,
    k: KernelSpec | None = None,
    c_bound: float = 1000.0,
    kkt_tol: float = 1e-3,
    max_passes: int = 10000,
) -> tuple[Model, DualSolution]:
    ts = TrainingSet(points, labels)
    sol = solve_dual(ts, k, c_bound=c_bound, kkt_tol=kkt_tol, max_passes=max_passes)
    return build_model(sol, ts), sol
