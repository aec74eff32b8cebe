# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot loops; drop-in replacement for ``_pycore``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport INFINITY

cnp.import_array()

cdef double TAU = 1e-12


def smo_solve(K, y, double C, double tol, long max_iter):
    cdef double[:, ::1] Kv = np.ascontiguousarray(K, dtype=np.float64)
    cdef double[::1] yv = np.ascontiguousarray(y, dtype=np.float64)
    cdef Py_ssize_t n = yv.shape[0]
    alpha_arr = np.zeros(n)
    G_arr = -np.ones(n)
    cdef double[::1] alpha = alpha_arr
    cdef double[::1] G = G_arr
    cdef Py_ssize_t i, j, t
    cdef long it = 0
    cdef bint converged = False
    cdef double gmax, gmin, v, yi, yj, ai, aj, ai_old, aj_old, quad, delta, diff, s, ci, cj
    while it < max_iter:
        i = -1
        j = -1
        gmax = -INFINITY
        gmin = INFINITY
        for t in range(n):
            v = -yv[t] * G[t]
            if (yv[t] > 0 and alpha[t] < C) or (yv[t] < 0 and alpha[t] > 0):
                if v > gmax:
                    gmax = v
                    i = t
            if (yv[t] > 0 and alpha[t] > 0) or (yv[t] < 0 and alpha[t] < C):
                if v < gmin:
                    gmin = v
                    j = t
        if i < 0 or j < 0 or gmax - gmin < tol:
            converged = True
            break
        it += 1
        yi = yv[i]
        yj = yv[j]
        ai_old = alpha[i]
        aj_old = alpha[j]
        ai = ai_old
        aj = aj_old
        if yi != yj:
            quad = Kv[i, i] + Kv[j, j] + 2.0 * (yi * yj * Kv[i, j])
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
            quad = Kv[i, i] + Kv[j, j] - 2.0 * (yi * yj * Kv[i, j])
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
        alpha[i] = ai
        alpha[j] = aj
        ci = yi * (ai - ai_old)
        cj = yj * (aj - aj_old)
        for t in range(n):
            G[t] += ci * (yv[t] * Kv[i, t]) + cj * (yv[t] * Kv[j, t])
    return alpha_arr, G_arr, it, converged


def best_split(X, idx, w, y, features, Py_ssize_t n_classes):
    cdef double[:, :] Xv = X
    cdef Py_ssize_t[::1] rows = np.ascontiguousarray(idx, dtype=np.intp)
    cdef double[::1] wv = np.ascontiguousarray(w, dtype=np.float64)
    cdef Py_ssize_t[::1] yv = np.ascontiguousarray(y, dtype=np.intp)
    cdef Py_ssize_t[::1] feats = np.ascontiguousarray(features, dtype=np.intp)
    cdef Py_ssize_t n = rows.shape[0], m = feats.shape[0]
    if n < 2 or m == 0:
        return -1, 0.0, -INFINITY
    vals_arr = np.empty(n)
    cdef double[::1] vals = vals_arr
    cdef double[::1] total = np.zeros(n_classes)
    cdef double[::1] left = np.zeros(n_classes)
    cdef Py_ssize_t[::1] order
    cdef Py_ssize_t c, r, k, row, best_f = -1
    cdef double wt = 0.0, wl, wr, sl, sr, score, lo, hi, thr, best_thr = 0.0, best_score = -INFINITY
    cdef double feat_best, feat_lo = 0.0, feat_hi = 0.0
    cdef Py_ssize_t feat_r
    for r in range(n):
        total[yv[rows[r]]] += wv[rows[r]]
    for k in range(n_classes):
        wt += total[k]
    for c in range(m):
        for r in range(n):
            vals[r] = Xv[rows[r], feats[c]]
        order = np.argsort(vals_arr, kind="stable").astype(np.intp)
        for k in range(n_classes):
            left[k] = 0.0
        feat_best = -INFINITY
        feat_r = -1
        for r in range(n - 1):
            row = rows[order[r]]
            left[yv[row]] += wv[row]
            lo = vals[order[r]]
            hi = vals[order[r + 1]]
            if not hi > lo:
                continue
            wl = 0.0
            sl = 0.0
            sr = 0.0
            for k in range(n_classes):
                wl += left[k]
            wr = wt - wl
            if wl <= 0 or wr <= 0:
                continue
            for k in range(n_classes):
                sl += left[k] * left[k]
                sr += (total[k] - left[k]) * (total[k] - left[k])
            score = sl / wl + sr / wr
            if score > feat_best:
                feat_best = score
                feat_r = r
                feat_lo = lo
                feat_hi = hi
        if feat_r >= 0 and feat_best > best_score:
            thr = feat_lo + (feat_hi - feat_lo) / 2.0
            if not thr < feat_hi:
                thr = feat_lo
            best_f = feats[c]
            best_thr = thr
            best_score = feat_best
    return int(best_f), float(best_thr), float(best_score)


def forest_apply(feature, threshold, left, right, roots, X):
    cdef Py_ssize_t[::1] fv = np.ascontiguousarray(feature, dtype=np.intp)
    cdef double[::1] tv = np.ascontiguousarray(threshold, dtype=np.float64)
    cdef Py_ssize_t[::1] lv = np.ascontiguousarray(left, dtype=np.intp)
    cdef Py_ssize_t[::1] rv = np.ascontiguousarray(right, dtype=np.intp)
    cdef Py_ssize_t[::1] roots_v = np.ascontiguousarray(roots, dtype=np.intp)
    cdef double[:, :] Xv = np.atleast_2d(np.asarray(X, dtype=np.float64))
    cdef Py_ssize_t n = Xv.shape[0], T = roots_v.shape[0], s, t, node
    out_arr = np.empty((n, T), dtype=np.intp)
    cdef Py_ssize_t[:, ::1] out = out_arr
    for s in range(n):
        for t in range(T):
            node = roots_v[t]
            while fv[node] >= 0:
                if Xv[s, fv[node]] <= tv[node]:
                    node = lv[node]
                else:
                    node = rv[node]
            out[s, t] = node
    return out_arr
