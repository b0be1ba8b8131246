"""Pure numpy fallback for the compiled tree kernels (same contract, same results)."""

from __future__ import annotations

import numpy as np


def find_splits(X, order, node_of, n_nodes, grad, hess, reg_lambda, min_child_weight, gamma):
    """Best exact-greedy split per node, evaluating all nodes of one tree level.

    ``order[f]`` lists sample indices sorted by feature ``f``; ``node_of[i]``
    is the local node of sample ``i`` or -1 when it is not being split.
    Returns (gain, feature, threshold) per node; feature -1 means no split
    beats a gain of zero.
    """
    active = node_of >= 0
    # bincount accumulates in index order, like the compiled kernel
    tot_g = np.bincount(node_of[active], weights=grad[active], minlength=n_nodes)
    tot_h = np.bincount(node_of[active], weights=hess[active], minlength=n_nodes)
    parent = tot_g * tot_g / (tot_h + reg_lambda)

    best = np.zeros(n_nodes)
    feat = np.full(n_nodes, -1, dtype=np.intp)
    thr = np.zeros(n_nodes)
    n_feat = X.shape[1]
    for f in range(n_feat):
        ord_f = order[f]
        nodes_sorted = node_of[ord_f]
        for nd in range(n_nodes):
            idx = ord_f[nodes_sorted == nd]
            if idx.size < 2:
                continue
            x = X[idx, f]
            gl = np.cumsum(grad[idx])[:-1]
            hl = np.cumsum(hess[idx])[:-1]
            gr = tot_g[nd] - gl
            hr = tot_h[nd] - hl
            gain = 0.5 * (gl * gl / (hl + reg_lambda) + gr * gr / (hr + reg_lambda)
                          - parent[nd]) - gamma
            ok = (x[1:] != x[:-1]) & (hl >= min_child_weight) & (hr >= min_child_weight)
            if not ok.any():
                continue
            gain = np.where(ok, gain, -np.inf)
            k = int(np.argmax(gain))
            if gain[k] > best[nd]:
                best[nd] = gain[k]
                feat[nd] = f
                thr[nd] = 0.5 * (x[k] + x[k + 1])
    return best, feat, thr


def predict_forest(X, feature, threshold, left, right, value, base_margin):
    n = X.shape[0]
    out = np.full(n, base_margin)
    rows = np.arange(n)
    for t in range(feature.shape[0]):
        nd = np.zeros(n, dtype=np.intp)
        f = feature[t, nd]
        while True:
            inner = f >= 0
            if not inner.any():
                break
            xv = X[rows[inner], f[inner]]
            cur = nd[inner]
            nd[inner] = np.where(xv < threshold[t, cur], left[t, cur], right[t, cur])
            f = feature[t, nd]
        out += value[t, nd]
    return out
