# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels for exact-greedy tree growth and ensemble inference.

Mirrors ``_kernels_py`` operation for operation, including summation order,
so both backends produce bit-identical splits.
"""

import numpy as np
cimport numpy as cnp

cnp.import_array()

ctypedef cnp.intp_t intp


def find_splits(const double[:, ::1] X, const intp[:, ::1] order,
                const intp[::1] node_of, Py_ssize_t n_nodes,
                const double[::1] grad, const double[::1] hess,
                double reg_lambda, double min_child_weight, double gamma):
    cdef Py_ssize_t n = X.shape[0], n_feat = X.shape[1]
    cdef Py_ssize_t f, j, i, nd
    cdef double x, gl, hl, gr, hr, gain, g_tot, h_tot

    tot_g_arr = np.zeros(n_nodes)
    tot_h_arr = np.zeros(n_nodes)
    best_arr = np.zeros(n_nodes)
    feat_arr = np.full(n_nodes, -1, dtype=np.intp)
    thr_arr = np.zeros(n_nodes)
    gl_arr = np.zeros(n_nodes)
    hl_arr = np.zeros(n_nodes)
    last_arr = np.zeros(n_nodes)
    seen_arr = np.zeros(n_nodes, dtype=np.uint8)

    cdef double[::1] tot_g = tot_g_arr, tot_h = tot_h_arr, best = best_arr
    cdef double[::1] thr = thr_arr, GL = gl_arr, HL = hl_arr, last = last_arr
    cdef intp[::1] feat = feat_arr
    cdef unsigned char[::1] seen = seen_arr

    for i in range(n):
        nd = node_of[i]
        if nd >= 0:
            tot_g[nd] += grad[i]
            tot_h[nd] += hess[i]

    for f in range(n_feat):
        for nd in range(n_nodes):
            GL[nd] = 0.0
            HL[nd] = 0.0
            seen[nd] = 0
        for j in range(n):
            i = order[f, j]
            nd = node_of[i]
            if nd < 0:
                continue
            x = X[i, f]
            if seen[nd] and x != last[nd]:
                gl = GL[nd]
                hl = HL[nd]
                g_tot = tot_g[nd]
                h_tot = tot_h[nd]
                gr = g_tot - gl
                hr = h_tot - hl
                if hl >= min_child_weight and hr >= min_child_weight:
                    gain = 0.5 * (gl * gl / (hl + reg_lambda) + gr * gr / (hr + reg_lambda)
                                  - g_tot * g_tot / (h_tot + reg_lambda)) - gamma
                    if gain > best[nd]:
                        best[nd] = gain
                        feat[nd] = f
                        thr[nd] = 0.5 * (last[nd] + x)
            GL[nd] += grad[i]
            HL[nd] += hess[i]
            last[nd] = x
            seen[nd] = 1
    return best_arr, feat_arr, thr_arr


def predict_forest(const double[:, ::1] X, const intp[:, ::1] feature,
                   const double[:, ::1] threshold, const intp[:, ::1] left,
                   const intp[:, ::1] right, const double[:, ::1] value,
                   double base_margin):
    cdef Py_ssize_t n = X.shape[0], n_trees = feature.shape[0]
    cdef Py_ssize_t i, t, nd
    cdef intp f
    out_arr = np.full(n, base_margin)
    cdef double[::1] out = out_arr
    for i in range(n):
        for t in range(n_trees):
            nd = 0
            f = feature[t, 0]
            while f >= 0:
                if X[i, f] < threshold[t, nd]:
                    nd = left[t, nd]
                else:
                    nd = right[t, nd]
                f = feature[t, nd]
            out[i] += value[t, nd]
    return out_arr
