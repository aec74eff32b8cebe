"""Kernel SVM trained with SMO, combined one-vs-one for multiclass problems."""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from typing import Hashable, Sequence

import numpy as np

from ..errors import DimMismatch, SingleClassData
from ._backend import core
from .kernels import KernelSpec, gram

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SvmParams:
    c: float = 1.0
    tol: float = 1e-3
    max_passes: int = 1000
    seed: int = 0

    def __post_init__(self):
        if not self.c > 0 or not self.tol > 0:
            raise ValueError("c and tol must be positive")
        if self.max_passes < 1:
            raise ValueError("max_passes must be >= 1")


@dataclass(eq=False)
class BinarySvm:
    support_vectors: np.ndarray      # n_sv x dim
    dual_coefs: np.ndarray           # alpha_i * y_i
    bias: float
    kernel: KernelSpec
    class_pair: tuple = (1, -1)      # (class for f > 0, class for f <= 0)
    converged: bool = True
    n_iter: int = 0

    @property
    def dim(self) -> int:
        return self.support_vectors.shape[1]

    def decision(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        if X.shape[1] != self.dim:
            raise DimMismatch(f"model dim {self.dim}, input dim {X.shape[1]}")
        return gram(self.kernel, X, self.support_vectors) @ self.dual_coefs + self.bias


def dual_objective(alpha, y, K) -> float:
    """W(alpha) = sum(alpha) - 0.5 * sum_ij alpha_i alpha_j y_i y_j K_ij."""
    ay = np.asarray(alpha) * np.asarray(y)
    return float(np.sum(alpha) - 0.5 * ay @ K @ ay)


def _bias(alpha, grad, y, c) -> float:
    # Average -y_i G_i over free multipliers; midpoint of the feasible interval otherwise.
    yG = y * grad
    # multipliers within rounding of a bound count as bounded
    eps = 1e-8 * c
    upper = alpha >= c - eps
    lower = alpha <= eps
    free = ~(upper | lower)
    if free.any():
        return float(-yG[free].mean()) + 0.0
    ub_mask = (upper & (y < 0)) | (lower & (y > 0))
    lb_mask = (upper & (y > 0)) | (lower & (y < 0))
    ub = yG[ub_mask].min() if ub_mask.any() else np.inf
    lb = yG[lb_mask].max() if lb_mask.any() else -np.inf
    return float(-(ub + lb) / 2.0) + 0.0


def solve_dual(K, y, params: SvmParams):
    """Run SMO on a precomputed Gram matrix. Returns (alpha, bias, n_iter, converged)."""
    y = np.asarray(y, dtype=np.float64)
    max_iter = params.max_passes * max(y.size, 100)
    alpha, grad, n_iter, converged = core.smo_solve(K, y, params.c, params.tol, max_iter)
    return alpha, _bias(alpha, grad, y, params.c), int(n_iter), bool(converged)


def train_binary_svm(X, y, kernel: KernelSpec | None = None, params: SvmParams | None = None,
                     class_pair: tuple = (1, -1)) -> BinarySvm:
    """Fit a two-class SVM. ``y`` holds +1 / -1."""
    kernel = kernel or KernelSpec()
    params = params or SvmParams()
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    y = np.asarray(y, dtype=np.float64)
    if X.shape[0] != y.size:
        raise DimMismatch(f"{X.shape[0]} rows but {y.size} labels")
    if not set(np.unique(y)) <= {-1.0, 1.0}:
        raise ValueError("binary labels must be +1 / -1")
    if np.unique(y).size < 2:
        raise SingleClassData("training data holds a single class")
    if not np.isfinite(X).all():
        raise ValueError("training data contains non-finite values")
    kernel = kernel.resolve(X)
    alpha, bias, n_iter, converged = solve_dual(gram(kernel, X), y, params)
    if not converged:
        log.warning("SMO hit its iteration budget (%d) before reaching tol=%g", n_iter, params.tol)
    sv = alpha > 0
    return BinarySvm(X[sv].copy(), (alpha * y)[sv], bias, kernel, tuple(class_pair), converged, n_iter)


def decision_function(model: BinarySvm, x) -> float | np.ndarray:
    vals = model.decision(x)
    return float(vals[0]) if np.ndim(x) == 1 else vals


@dataclass(eq=False)
class MulticlassSvm:
    classes: list
    machines: list[BinarySvm] = field(default_factory=list)

    @property
    def pairs(self) -> list[tuple[int, int]]:
        return list(itertools.combinations(range(len(self.classes)), 2))

    def decisions(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        return np.column_stack([m.decision(X) for m in self.machines])

    def predict(self, X) -> list:
        return [self.classes[k] for k in vote(self.decisions(X), len(self.classes))]


def vote(decisions: np.ndarray, n_classes: int) -> np.ndarray:
    """One-vs-one majority vote over (n_samples, n_pairs) decision values.

    Pair (a, b) votes a when its value is > 0, else b. Ties go to the class
    whose winning machines were most confident (largest summed |value|), then
    to the earlier class.
    """
    decisions = np.atleast_2d(decisions)
    pairs = list(itertools.combinations(range(n_classes), 2))
    votes = np.zeros((decisions.shape[0], n_classes), dtype=np.int64)
    conf = np.zeros((decisions.shape[0], n_classes))
    for p, (a, b) in enumerate(pairs):
        d = decisions[:, p]
        win = np.where(d > 0, a, b)
        np.add.at(votes, (np.arange(d.size), win), 1)
        np.add.at(conf, (np.arange(d.size), win), np.abs(d))
    out = np.empty(decisions.shape[0], dtype=np.intp)
    for s in range(decisions.shape[0]):
        tied = np.flatnonzero(votes[s] == votes[s].max())
        out[s] = tied[0] if tied.size == 1 else min(tied, key=lambda k: (-conf[s, k], k))
    return out


def train_multiclass(X, labels: Sequence[Hashable], kernel: KernelSpec | None = None,
                     params: SvmParams | None = None, classes: Sequence | None = None) -> MulticlassSvm:
    """One binary SVM per class pair; ``classes`` fixes class order (default: sorted labels)."""
    kernel = kernel or KernelSpec()
    params = params or SvmParams()
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    labels = list(labels)
    present = set(labels)
    classes = [c for c in classes if c in present] if classes is not None else sorted(present)
    if len(classes) < 2:
        raise SingleClassData("need at least two classes to train a classifier")
    kernel = kernel.resolve(X)
    lab = np.array([classes.index(l) for l in labels])
    machines = []
    for a, b in itertools.combinations(range(len(classes)), 2):
        rows = (lab == a) | (lab == b)
        try:
            m = train_binary_svm(X[rows], np.where(lab[rows] == a, 1.0, -1.0), kernel, params,
                                 class_pair=(classes[a], classes[b]))
        except SingleClassData as exc:
            raise SingleClassData(f"pair ({classes[a]}, {classes[b]}): {exc}") from None
        machines.append(m)
    return MulticlassSvm(list(classes), machines)


def predict(model: MulticlassSvm, x):
    """Class of a single vector, or a list of classes for a 2-D batch."""
    out = model.predict(x)
    return out[0] if np.ndim(x) == 1 else out
