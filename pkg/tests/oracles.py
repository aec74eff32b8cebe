"""Independent reference solvers used by the tests."""

import cvxopt
import numpy as np

cvxopt.solvers.options.update(show_progress=False, abstol=1e-11, reltol=1e-11, feastol=1e-11)


def qp_dual(K, y, C):
    """Soft-margin SVM dual via an interior-point QP; returns (alpha, bias).

    The bias is the midpoint of the interval allowed by the KKT conditions
    (or the mean over margin points when there are any).
    """
    y = np.asarray(y, dtype=float)
    n = y.size
    P = cvxopt.matrix(np.outer(y, y) * K + 1e-12 * np.eye(n))
    q = cvxopt.matrix(-np.ones(n))
    G = cvxopt.matrix(np.vstack([-np.eye(n), np.eye(n)]))
    h = cvxopt.matrix(np.r_[np.zeros(n), C * np.ones(n)])
    A = cvxopt.matrix(y[None, :])
    sol = cvxopt.solvers.qp(P, q, G, h, A, cvxopt.matrix(0.0))
    alpha = np.clip(np.array(sol["x"]).ravel(), 0, C)
    g = K @ (alpha * y)
    r = y - g
    eps = 1e-7 * max(1.0, C)
    free = (alpha > eps) & (alpha < C - eps)
    if free.any():
        return alpha, float(r[free].mean())
    at0, atC = alpha <= eps, alpha >= C - eps
    lower = r[(at0 & (y > 0)) | (atC & (y < 0))]
    upper = r[(at0 & (y < 0)) | (atC & (y > 0))]
    lo = lower.max() if lower.size else upper.min()
    hi = upper.min() if upper.size else lower.max()
    return alpha, float((lo + hi) / 2)


def dual_value(alpha, y, K):
    ay = alpha * y
    return float(alpha.sum() - 0.5 * ay @ K @ ay)


def random_instance(rng, n_max=30):
    """2-D two-class instance of 4..n_max points, roughly linearly arranged with label noise."""
    n = int(rng.integers(4, n_max + 1))
    X = rng.normal(size=(n, 2))
    y = np.where(X @ rng.normal(size=2) + 0.4 * rng.normal(size=n) > 0, 1.0, -1.0)
    if np.unique(y).size < 2:
        y[0] = -y[0]
    return X, y
