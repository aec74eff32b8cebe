"""Kernel functions and Gram matrices."""

from __future__ import annotations

import enum
from dataclasses import dataclass, replace

import numpy as np

from ..errors import DimMismatch


class KernelKind(str, enum.Enum):
    LINEAR = "linear"
    POLYNOMIAL = "polynomial"
    RBF = "rbf"
    SIGMOID = "sigmoid"


@dataclass(frozen=True)
class KernelSpec:
    kind: KernelKind = KernelKind.RBF
    gamma: float | str = "scale"
    degree: int = 3
    coef0: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "kind", KernelKind(self.kind))
        if isinstance(self.gamma, str):
            if self.gamma != "scale":
                raise ValueError(f"gamma must be positive or 'scale', got {self.gamma!r}")
        elif not self.gamma > 0:
            raise ValueError(f"gamma must be positive, got {self.gamma}")
        if self.degree < 1:
            raise ValueError("degree must be >= 1")

    @property
    def resolved(self) -> bool:
        return not isinstance(self.gamma, str)

    def resolve(self, X) -> "KernelSpec":
        """Fix gamma='scale' to 1 / (dim * variance of all training feature values)."""
        if self.resolved:
            return self
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        var = X.var()
        return replace(self, gamma=1.0 / (X.shape[1] * var) if var > 0 else 1.0)

    def to_json(self) -> dict:
        return {"kind": self.kind.value, "gamma": self.gamma, "degree": self.degree, "coef0": self.coef0}

    @classmethod
    def from_json(cls, d: dict) -> "KernelSpec":
        return cls(**d)


def _check(spec: KernelSpec, dx: int, dy: int):
    if dx != dy:
        raise DimMismatch(f"kernel arguments have dims {dx} and {dy}")
    if not spec.resolved:
        raise ValueError("kernel gamma not resolved; call spec.resolve(X_train)")


def kernel_eval(spec: KernelSpec, x, y) -> float:
    x = np.asarray(x, dtype=np.float64).ravel()
    y = np.asarray(y, dtype=np.float64).ravel()
    _check(spec, x.size, y.size)
    if spec.kind is KernelKind.LINEAR:
        return float(x @ y)
    if spec.kind is KernelKind.POLYNOMIAL:
        return float((spec.gamma * (x @ y) + spec.coef0) ** spec.degree)
    if spec.kind is KernelKind.RBF:
        d = x - y
        return float(np.exp(-spec.gamma * (d @ d)))
    return float(np.tanh(spec.gamma * (x @ y) + spec.coef0))


def gram(spec: KernelSpec, A, B=None) -> np.ndarray:
    """K[i, j] = k(A[i], B[j]); B defaults to A."""
    A = np.atleast_2d(np.asarray(A, dtype=np.float64))
    B = A if B is None else np.atleast_2d(np.asarray(B, dtype=np.float64))
    _check(spec, A.shape[1], B.shape[1])
    dots = A @ B.T
    if spec.kind is KernelKind.LINEAR:
        return dots
    if spec.kind is KernelKind.POLYNOMIAL:
        return (spec.gamma * dots + spec.coef0) ** spec.degree
    if spec.kind is KernelKind.SIGMOID:
        return np.tanh(spec.gamma * dots + spec.coef0)
    sq = np.einsum("ij,ij->i", A, A)[:, None] + np.einsum("ij,ij->i", B, B)[None, :] - 2.0 * dots
    np.maximum(sq, 0.0, out=sq)
    if B is A:
        np.fill_diagonal(sq, 0.0)
    return np.exp(-spec.gamma * sq)
