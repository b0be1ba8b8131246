"""Gradient-boosted trees (logistic loss, exact greedy splits) and an L2
logistic regression used as the alternative distinguisher."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kernels


def _sigmoid(z):
    return 0.5 * (1.0 + np.tanh(0.5 * z))


def log_loss(y, margin) -> float:
    # log(1 + e^z) - y z, stable for large |z|
    return float(np.mean(np.logaddexp(0.0, margin) - y * margin))


@dataclass
class _Tree:
    feature: list = field(default_factory=list)
    threshold: list = field(default_factory=list)
    left: list = field(default_factory=list)
    right: list = field(default_factory=list)
    value: list = field(default_factory=list)

    def add(self) -> int:
        self.feature.append(-1)
        self.threshold.append(0.0)
        self.left.append(-1)
        self.right.append(-1)
        self.value.append(0.0)
        return len(self.feature) - 1


class GradientBoostedTrees:
    """Binary classifier; ``predict_proba`` returns P(label = 1) in [0, 1]."""

    def __init__(self, n_rounds=200, max_depth=3, learning_rate=0.1, reg_lambda=1.0,
                 min_child_weight=1.0, gamma=0.0, early_stopping_rounds=20, seed=0,
                 backend=None):
        self.n_rounds = n_rounds
        self.max_depth = max_depth
        self.learning_rate = learning_rate
        self.reg_lambda = reg_lambda
        self.min_child_weight = min_child_weight
        self.gamma = gamma
        self.early_stopping_rounds = early_stopping_rounds
        self.seed = seed
        self._k = kernels.backend if backend is None else kernels.load_backend(backend)
        self.base_margin = 0.0
        self.trees_: list[_Tree] = []
        self.val_loss_: list[float] = []
        self.best_rounds_ = 0

    def _grow(self, X, order, grad, hess) -> tuple[_Tree, np.ndarray]:
        tree = _Tree()
        root = tree.add()
        n = X.shape[0]
        node = np.zeros(n, dtype=np.intp)
        frontier = [root]
        for _ in range(self.max_depth):
            local = np.full(len(tree.feature), -1, dtype=np.intp)
            local[frontier] = np.arange(len(frontier))
            node_of = local[node]
            _, feat, thr = self._k.find_splits(
                X, order, node_of, len(frontier), grad, hess,
                self.reg_lambda, self.min_child_weight, self.gamma,
            )
            nxt = []
            for j, nd in enumerate(frontier):
                if feat[j] < 0:
                    continue
                lt, rt = tree.add(), tree.add()
                tree.feature[nd] = int(feat[j])
                tree.threshold[nd] = float(thr[j])
                tree.left[nd], tree.right[nd] = lt, rt
                members = node_of == j
                go_left = X[:, feat[j]] < thr[j]
                node[members & go_left] = lt
                node[members & ~go_left] = rt
                nxt += [lt, rt]
            if not nxt:
                break
            frontier = nxt
        g = np.bincount(node, weights=grad, minlength=len(tree.feature))
        h = np.bincount(node, weights=hess, minlength=len(tree.feature))
        leaf_values = -g / (h + self.reg_lambda) * self.learning_rate
        for nd in range(len(tree.feature)):
            if tree.feature[nd] < 0:
                tree.value[nd] = float(leaf_values[nd])
        return tree, leaf_values[node]

    def fit(self, X, y, X_val=None, y_val=None) -> "GradientBoostedTrees":
        X = np.ascontiguousarray(X, dtype=float)
        y = np.asarray(y, dtype=float)
        if len(np.unique(y)) < 2:
            raise ValueError("training set must contain both classes")
        order = np.ascontiguousarray(np.argsort(X, axis=0, kind="stable").T, dtype=np.intp)
        margin = np.full(X.shape[0], self.base_margin)
        has_val = X_val is not None and len(X_val) > 0
        if has_val:
            X_val = np.ascontiguousarray(X_val, dtype=float)
            y_val = np.asarray(y_val, dtype=float)
            val_margin = np.full(X_val.shape[0], self.base_margin)

        self.trees_, self.val_loss_ = [], []
        best, best_round = np.inf, 0
        for r in range(self.n_rounds):
            p = _sigmoid(margin)
            tree, delta = self._grow(X, order, p - y, p * (1.0 - p))
            self.trees_.append(tree)
            margin += delta
            if has_val:
                val_margin += self._predict_tree(tree, X_val)
                loss = log_loss(y_val, val_margin)
                self.val_loss_.append(loss)
                if loss < best:
                    best, best_round = loss, r + 1
                elif r + 1 - best_round >= self.early_stopping_rounds:
                    break
        self.best_rounds_ = best_round if has_val else len(self.trees_)
        self.trees_ = self.trees_[: self.best_rounds_]
        self._pack()
        return self

    def _pack(self):
        width = max((len(t.feature) for t in self.trees_), default=1)
        T = len(self.trees_)
        self._feature = np.full((T, width), -1, dtype=np.intp)
        self._threshold = np.zeros((T, width))
        self._left = np.full((T, width), -1, dtype=np.intp)
        self._right = np.full((T, width), -1, dtype=np.intp)
        self._value = np.zeros((T, width))
        for i, t in enumerate(self.trees_):
            k = len(t.feature)
            self._feature[i, :k] = t.feature
            self._threshold[i, :k] = t.threshold
            self._left[i, :k] = t.left
            self._right[i, :k] = t.right
            self._value[i, :k] = t.value

    def _predict_tree(self, tree: _Tree, X) -> np.ndarray:
        k = len(tree.feature)
        arr = lambda v, dt: np.asarray(v, dtype=dt).reshape(1, k)  # noqa: E731
        return self._k.predict_forest(
            X, arr(tree.feature, np.intp), arr(tree.threshold, float),
            arr(tree.left, np.intp), arr(tree.right, np.intp), arr(tree.value, float), 0.0,
        )

    def decision_function(self, X) -> np.ndarray:
        X = np.ascontiguousarray(X, dtype=float)
        return self._k.predict_forest(
            X, self._feature, self._threshold, self._left, self._right, self._value,
            self.base_margin,
        )

    def predict_proba(self, X) -> np.ndarray:
        return _sigmoid(self.decision_function(X))


class LogisticDistinguisher:
    """L2-regularized logistic regression fit by Newton's method on
    standardized features. The intercept is not penalized."""

    def __init__(self, reg_lambda=1.0, max_iter=100, tol=1e-10, seed=0):
        self.reg_lambda = reg_lambda
        self.max_iter = max_iter
        self.tol = tol
        self.seed = seed

    def fit(self, X, y, X_val=None, y_val=None) -> "LogisticDistinguisher":
        X = np.asarray(X, dtype=float)
        y = np.asarray(y, dtype=float)
        if len(np.unique(y)) < 2:
            raise ValueError("training set must contain both classes")
        self.mean_ = X.mean(axis=0)
        scale = X.std(axis=0)
        self.scale_ = np.where(scale > 0, scale, 1.0)
        Z = np.hstack([np.ones((len(X), 1)), (X - self.mean_) / self.scale_])
        penalty = np.full(Z.shape[1], self.reg_lambda)
        penalty[0] = 0.0
        w = np.zeros(Z.shape[1])
        for _ in range(self.max_iter):
            p = _sigmoid(Z @ w)
            grad = Z.T @ (p - y) + penalty * w
            hess = (Z * (p * (1 - p))[:, None]).T @ Z + np.diag(penalty) + 1e-12 * np.eye(len(w))
            step = np.linalg.solve(hess, grad)
            w -= step
            if np.max(np.abs(step)) < self.tol:
                break
        self.coef_ = w
        return self

    def decision_function(self, X) -> np.ndarray:
        Z = (np.asarray(X, dtype=float) - self.mean_) / self.scale_
        return self.coef_[0] + Z @ self.coef_[1:]

    def predict_proba(self, X) -> np.ndarray:
        return _sigmoid(self.decision_function(X))
