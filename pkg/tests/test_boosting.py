import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gdpaudit import _kernels_py, kernels
from gdpaudit.boosting import GradientBoostedTrees, LogisticDistinguisher, log_loss

from oracles import best_split_bruteforce

BACKENDS = ["python"] + (["cython"] if kernels.BACKEND == "cython" else [])


def _presort(X):
    return np.ascontiguousarray(np.argsort(X, axis=0, kind="stable").T, dtype=np.intp)


def _root_split(k, X, grad, hess, lam=1.0, mcw=1.0):
    node_of = np.zeros(len(X), dtype=np.intp)
    g, f, t = k.find_splits(X, _presort(X), node_of, 1, grad, hess, lam, mcw, 0.0)
    return float(g[0]), int(f[0]), float(t[0])


@pytest.mark.parametrize("name", BACKENDS)
@pytest.mark.parametrize("seed", range(5))
def test_root_split_matches_bruteforce(name, seed):
    rng = np.random.default_rng(seed)
    X = np.round(rng.normal(size=(60, 4)), 1)  # ties included
    y = rng.integers(0, 2, 60)
    p = rng.uniform(0.2, 0.8, 60)
    grad, hess = p - y, p * (1 - p)
    gain, f, thr = _root_split(kernels.load_backend(name), X, grad, hess, mcw=2.0)
    og, of, ot = best_split_bruteforce(X, grad, hess, 1.0, 2.0)
    assert gain == pytest.approx(og, rel=1e-9, abs=1e-12)
    assert (f, thr) == (of, ot)


@pytest.mark.skipif("cython" not in BACKENDS, reason="compiled backend unavailable")
@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 80), st.integers(1, 5), st.integers(1, 4))
def test_backends_find_identical_splits(seed, n, d, n_nodes):
    rng = np.random.default_rng(seed)
    X = np.round(rng.normal(size=(n, d)), 1)
    node_of = rng.integers(-1, n_nodes, n).astype(np.intp)
    grad = rng.normal(size=n)
    hess = rng.uniform(0.01, 0.25, n)
    args = (X, _presort(X), node_of, n_nodes, grad, hess, 1.0, 0.1, 0.0)
    a = kernels.load_backend("cython").find_splits(*args)
    b = _kernels_py.find_splits(*args)
    for u, v in zip(a, b):
        assert np.array_equal(np.asarray(u), np.asarray(v))


def _toy(seed, n=400, d=5, separable=False):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n, d))
    y = (X[:, 0] + 0.5 * X[:, 1] > 0).astype(int) if separable else rng.integers(0, 2, n)
    return X, y


@pytest.mark.skipif("cython" not in BACKENDS, reason="compiled backend unavailable")
def test_backends_train_identical_models():
    X, y = _toy(0, separable=True)
    Xv, yv = _toy(1, separable=True)
    a = GradientBoostedTrees(backend="cython").fit(X, y, Xv, yv)
    b = GradientBoostedTrees(backend="python").fit(X, y, Xv, yv)
    assert a.best_rounds_ == b.best_rounds_
    assert np.array_equal(a.decision_function(Xv), b.decision_function(Xv))
    assert np.array_equal(a.predict_proba(Xv), b.predict_proba(Xv))


@pytest.mark.parametrize("name", BACKENDS)
def test_separable_toy_is_learned(name):
    rng = np.random.default_rng(3)
    X = rng.normal(size=(400, 3))
    y = (X[:, 1] > 0.2).astype(int)
    m = GradientBoostedTrees(backend=name).fit(X, y)
    Xt = rng.normal(size=(400, 3))
    yt = (Xt[:, 1] > 0.2).astype(int)
    acc = np.mean((m.predict_proba(Xt) >= 0.5) == yt)
    assert acc >= 0.97
    assert np.all((m.predict_proba(X) >= 0.5) == y)


def test_noise_gives_no_advantage():
    advs = []
    for seed in range(20):
        X, y = _toy(seed)
        Xv, yv = _toy(seed + 100)
        Xt, yt = _toy(seed + 200, n=2000)
        m = GradientBoostedTrees().fit(X, y, Xv, yv)
        pred = m.predict_proba(Xt) >= 0.5
        advs.append(pred[yt == 1].mean() - pred[yt == 0].mean())
    assert abs(np.mean(advs)) <= 0.05


def test_early_stopping_keeps_best_rounds():
    X, y = _toy(5)
    Xv, yv = _toy(6)
    m = GradientBoostedTrees().fit(X, y, Xv, yv)
    assert len(m.trees_) == m.best_rounds_
    assert m.best_rounds_ == int(np.argmin(m.val_loss_)) + 1
    assert len(m.val_loss_) <= m.best_rounds_ + 20


def test_no_validation_uses_all_rounds():
    X, y = _toy(5)
    m = GradientBoostedTrees(n_rounds=15).fit(X, y)
    assert m.best_rounds_ == 15


def test_training_is_deterministic():
    X, y = _toy(7)
    a = GradientBoostedTrees(seed=1).fit(X, y).predict_proba(X)
    b = GradientBoostedTrees(seed=1).fit(X, y).predict_proba(X)
    assert np.array_equal(a, b)


def test_rejects_single_class():
    with pytest.raises(ValueError):
        GradientBoostedTrees().fit(np.zeros((4, 1)), np.ones(4))


def test_log_loss_is_stable():
    assert log_loss(np.array([1.0]), np.array([1000.0])) == pytest.approx(0.0, abs=1e-300)
    assert log_loss(np.array([0.0]), np.array([1000.0])) == pytest.approx(1000.0)


def test_logistic_distinguisher():
    X, y = _toy(8, separable=True)
    m = LogisticDistinguisher().fit(X, y)
    p = m.predict_proba(X)
    assert np.all((p >= 0) & (p <= 1))
    assert np.mean((p >= 0.5) == y) > 0.95
