import math

import numpy as np
import pytest

from drowsiness.classify import KernelSpec, gram, kernel_eval
from drowsiness.errors import DimMismatch

KINDS = ["linear", "polynomial", "rbf", "sigmoid"]


def test_rbf_self_is_one():
    assert kernel_eval(KernelSpec("rbf", gamma=0.3), [1.0, 2.0], [1.0, 2.0]) == 1.0


def test_linear_dot():
    assert kernel_eval(KernelSpec("linear", gamma=1.0), [1, 2], [3, 4]) == 11.0


def test_rbf_value():
    # ||x - y||^2 = 2
    assert kernel_eval(KernelSpec("rbf", gamma=0.5), [0, 0], [1, 1]) == pytest.approx(math.exp(-1), abs=1e-12)
    assert kernel_eval(KernelSpec("rbf", gamma=0.5), [0, 0], [1, 1]) == pytest.approx(0.367879, abs=1e-6)


def test_polynomial_and_sigmoid_values():
    x, y = [1.0, -2.0], [0.5, 3.0]
    assert kernel_eval(KernelSpec("polynomial", gamma=0.5, degree=2, coef0=1.0), x, y) == pytest.approx(
        (0.5 * -5.5 + 1.0) ** 2)
    assert kernel_eval(KernelSpec("sigmoid", gamma=0.1, coef0=0.2), x, y) == pytest.approx(math.tanh(-0.35))


def test_dim_mismatch():
    with pytest.raises(DimMismatch):
        kernel_eval(KernelSpec("linear", gamma=1.0), [1, 2], [1, 2, 3])


def test_unresolved_gamma_rejected():
    with pytest.raises(ValueError, match="resolve"):
        kernel_eval(KernelSpec("rbf"), [1.0], [1.0])


def test_scale_gamma():
    X = np.array([[0.0, 2.0], [2.0, 0.0]])
    assert KernelSpec("rbf").resolve(X).gamma == pytest.approx(1.0 / (2 * X.var()))


@pytest.mark.parametrize("kind", KINDS)
def test_gram_matches_pointwise(kind):
    rng = np.random.default_rng(0)
    spec = KernelSpec(kind, gamma=0.3, degree=3, coef0=0.5)
    A, B = rng.normal(size=(6, 4)), rng.normal(size=(5, 4))
    K = gram(spec, A, B)
    expected = np.array([[kernel_eval(spec, a, b) for b in B] for a in A])
    np.testing.assert_allclose(K, expected, rtol=1e-12, atol=1e-12)


@pytest.mark.parametrize("seed", range(10))
@pytest.mark.parametrize("kind,coef0", [("linear", 0.0), ("polynomial", 0.0), ("polynomial", 1.5), ("rbf", 0.0)])
def test_gram_psd(kind, coef0, seed):
    rng = np.random.default_rng(seed)
    n, d = rng.integers(2, 21), rng.integers(1, 8)
    X = rng.normal(size=(n, d))
    K = gram(KernelSpec(kind, gamma=float(rng.uniform(0.05, 2.0)), degree=int(rng.integers(1, 5)), coef0=coef0), X)
    assert np.linalg.eigvalsh(K).min() >= -1e-8 * max(1.0, np.abs(K).max())
