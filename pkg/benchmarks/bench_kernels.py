"""Compare the compiled and numpy tree kernels on a default-sized attack.

    python benchmarks/bench_kernels.py [--repeat N]

Training matrix: 4000 x 33 hybrid features from the default game.
"""

import argparse
import time

import numpy as np

from gdpaudit import kernels
from gdpaudit.attack import feature_matrix
from gdpaudit.boosting import GradientBoostedTrees
from gdpaudit.game import GameConfig, run_game, select


def _time(fn, repeat):
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    cfg = GameConfig()
    trials = run_game(cfg)
    mats = {p: feature_matrix(select(trials, p), "hybrid", cfg.domain, cfg.workload)[:2]
            for p in ("train", "val", "test")}
    (Xtr, ytr), (Xv, yv), (Xt, _) = mats["train"], mats["val"], mats["test"]

    names = ["python"] + (["cython"] if kernels.BACKEND == "cython" else [])
    preds = {}
    print(f"{'backend':<8} {'fit [s]':>9} {'predict [ms]':>13} {'rounds':>7}")
    for name in names:
        t_fit, model = _time(lambda: GradientBoostedTrees(backend=name).fit(Xtr, ytr, Xv, yv),
                             args.repeat)
        t_pred, preds[name] = _time(lambda: model.predict_proba(Xt), args.repeat)
        print(f"{name:<8} {t_fit:>9.3f} {1e3 * t_pred:>13.2f} {model.best_rounds_:>7}")
    if len(preds) == 2:
        same = np.array_equal(preds["python"], preds["cython"])
        print(f"predictions bit-identical: {same}")


if __name__ == "__main__":
    main()
