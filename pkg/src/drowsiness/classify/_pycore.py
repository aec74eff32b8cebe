"""Pure numpy implementations of the hot loops.

Must produce the same results as the compiled ``_ccore`` module; the test
suite runs both against each other.
"""

import numpy as np

TAU = 1e-12


def smo_solve(K, y, C, tol, max_iter):
    """Solve the soft-margin SVM dual with SMO and maximal-violating-pair selection.

    Minimizes 0.5 a'Qa - sum(a) with Q_ij = y_i y_j K_ij, 0 <= a <= C, y'a = 0.
    Returns (alpha, gradient, iterations, converged).
    """
    K = np.ascontiguousarray(K, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.float64)
    n = y.size
    alpha = np.zeros(n)
    G = -np.ones(n)
    diag = np.diag(K).copy()
    it = 0
    converged = False
    while it < max_iter:
        yG = -y * G
        up = ((y > 0) & (alpha < C)) | ((y < 0) & (alpha > 0))
        low = ((y > 0) & (alpha > 0)) | ((y < 0) & (alpha < C))
        if not up.any() or not low.any():
            converged = True
            break
        i = int(np.argmax(np.where(up, yG, -np.inf)))
        j = int(np.argmin(np.where(low, yG, np.inf)))
        if yG[i] - yG[j] < tol:
            converged = True
            break
        it += 1
        Kij = K[i, j]
        yi, yj = y[i], y[j]
        ai_old, aj_old = alpha[i], alpha[j]
        ai, aj = ai_old, aj_old
        if yi != yj:
            quad = diag[i] + diag[j] + 2.0 * (yi * yj * Kij)
            if quad <= 0:
                quad = TAU
            delta = (-G[i] - G[j]) / quad
            diff = ai - aj
            ai += delta
            aj += delta
            if diff > 0:
                if aj < 0:
                    aj = 0.0
                    ai = diff
            else:
                if ai < 0:
                    ai = 0.0
                    aj = -diff
            if diff > 0:
                if ai > C:
                    ai = C
                    aj = C - diff
            else:
                if aj > C:
                    aj = C
                    ai = C + diff
        else:
            quad = diag[i] + diag[j] - 2.0 * (yi * yj * Kij)
            if quad <= 0:
                quad = TAU
            delta = (G[i] - G[j]) / quad
            s = ai + aj
            ai -= delta
            aj += delta
            if s > C:
                if ai > C:
                    ai = C
                    aj = s - C
            else:
                if aj < 0:
                    aj = 0.0
                    ai = s
            if s > C:
                if aj > C:
                    aj = C
                    ai = s - C
            else:
                if ai < 0:
                    ai = 0.0
                    aj = s
        alpha[i], alpha[j] = ai, aj
        dai, daj = ai - ai_old, aj - aj_old
        G += (yi * dai) * (y * K[i]) + (yj * daj) * (y * K[j])
    return alpha, G, it, converged


def best_split(X, idx, w, y, features, n_classes):
    """Best Gini split of rows ``idx`` over candidate ``features``.

    Returns (feature, threshold, score) where score = sum_child sum_c n_c^2 / n
    (larger is better); feature is -1 when no split separates distinct values.
    Rows with x <= threshold go left.
    """
    idx = np.asarray(idx, dtype=np.intp)
    features = np.asarray(features, dtype=np.intp)
    if idx.size < 2 or features.size == 0:
        return -1, 0.0, -np.inf
    V = X[np.ix_(idx, features)]                    # n x m
    order = np.argsort(V, axis=0, kind="stable")
    Vs = np.take_along_axis(V, order, axis=0)
    onehot = np.zeros((idx.size, n_classes))
    onehot[np.arange(idx.size), y[idx]] = w[idx]
    cum = np.cumsum(onehot[order], axis=0)          # n x m x k, left counts through row r
    total = cum[-1]                                 # m x k
    wl = cum.sum(axis=2)
    wt = total.sum(axis=1)
    left = cum[:-1]
    right = total[None, :, :] - left
    wl = wl[:-1]
    wr = wt[None, :] - wl
    valid = (Vs[1:] > Vs[:-1]) & (wl > 0) & (wr > 0)
    with np.errstate(divide="ignore", invalid="ignore"):
        score = (left * left).sum(axis=2) / wl + (right * right).sum(axis=2) / wr
    score = np.where(valid, score, -np.inf)
    best_f, best_thr, best_score = -1, 0.0, -np.inf
    for c in range(features.size):
        r = int(np.argmax(score[:, c]))
        s = score[r, c]
        if s > best_score:
            lo, hi = Vs[r, c], Vs[r + 1, c]
            thr = lo + (hi - lo) / 2.0
            if not thr < hi:
                thr = lo
            best_f, best_thr, best_score = int(features[c]), float(thr), float(s)
    return best_f, best_thr, best_score


def forest_apply(feature, threshold, left, right, roots, X):
    """Leaf node id reached by every row of X in every tree (rows x trees)."""
    X = np.atleast_2d(X)
    nodes = np.broadcast_to(np.asarray(roots, dtype=np.intp), (X.shape[0], len(roots))).copy()
    rows = np.arange(X.shape[0])[:, None]
    while True:
        f = feature[nodes]
        inner = f >= 0
        if not inner.any():
            return nodes
        go_left = X[rows, np.where(inner, f, 0)] <= threshold[nodes]
        nodes = np.where(inner, np.where(go_left, left[nodes], right[nodes]), nodes)
