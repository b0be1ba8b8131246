"""Acceptance suite: one check per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v`` or directly as a script.
"""

import math
import sys
import tempfile
import time
from pathlib import Path

import numpy as np
import pytest

from gdpaudit import accounting
from gdpaudit.audit import load_config, run_audit
from gdpaudit.cli import main as cli_main
from gdpaudit.estimation import ConfusionCounts, empirical_tradeoff, naive_whitebox_mu, posterior_mu_lower
from gdpaudit.game import build_neighbors, run_game, trial_rng, trial_seed
from gdpaudit.mechanism import DomainSpec, build_workload, measure, true_marginal

from oracles import bisect, gdp_delta_mp

DEFAULT = Path(__file__).resolve().parents[1] / "configs" / "default.cfg"


REPORT = []


def report(n, ok, detail):
    line = f"CRITERION {n}: {'PASS' if ok else 'FAIL'}  {detail}"
    REPORT.append(line)
    print(line, flush=True)
    return ok


def check_1():
    t0 = time.perf_counter()
    mu = accounting.implied_mu(1.0, 1e-2)
    dt = time.perf_counter() - t0
    ok = abs(mu - 0.45) <= 0.005 and dt < 1.0
    return report(1, ok, f"implied_mu(1, 1e-2) = {mu:.6f} (target 0.45 +- 0.005), {dt:.3f}s")


def check_2():
    direct = accounting.mu_from_dp(1.0, 1e-2)
    implied = accounting.implied_mu(1.0, 1e-2)
    oracle = bisect(lambda m: gdp_delta_mp(m, 1.0) - 1e-2, 1e-3, 10.0)
    ok = 0.50 < direct < 0.57 and direct > implied and abs(direct - oracle) <= 0.01
    return report(2, ok, f"mu_from_dp = {direct:.6f}, oracle {oracle:.6f}, implied {implied:.6f}")


def check_3():
    t0 = time.perf_counter()
    worst = max(abs(accounting.mu_from_dp(e, accounting.gdp_delta(m, e)) - m)
                for m in (0.1, 0.45, 1.0, 2.0, 3.0) for e in (0.1, 1.0, 3.0))
    dt = time.perf_counter() - t0
    ok = worst < 1e-6 and dt < 1.0
    return report(3, ok, f"max round-trip error {worst:.2e} over 15 points, {dt:.3f}s")


def _lrt_supnorm(order, n_trials=100_000, master_seed=0):
    dom = DomainSpec.binary(3)
    wl = build_workload(dom, order)
    rho = accounting.rho_from_dp(1.0, 1e-2)
    d_out, d_in = build_neighbors(dom, 10)
    base_out = np.concatenate([true_marginal(d_out, c).ravel() for c in wl.cliques])
    base_in = np.concatenate([true_marginal(d_in, c).ravel() for c in wl.cliques])
    shift = base_in - base_out
    scores = np.empty(n_trials)
    labels = np.arange(n_trials) % 2
    for i in range(n_trials):
        data = d_in if labels[i] else d_out
        y = measure(data, wl, rho, trial_rng(trial_seed(master_seed, i))).flat()
        # the Gaussian log likelihood ratio is increasing in this projection
        scores[i] = (y - base_out) @ shift
    curve = empirical_tradeoff(scores, labels)
    mu = accounting.rho_to_mu(rho)
    return float(np.max(np.abs(curve.beta - accounting.gauss_tradeoff(mu, curve.alpha))))


def check_4():
    t0 = time.perf_counter()
    sup = {o: _lrt_supnorm(o) for o in (1, 3)}
    dt = time.perf_counter() - t0
    ok = max(sup.values()) <= 0.02 and dt < 60
    return report(4, ok, f"sup-norm vs G_sqrt(2rho): order1 {sup[1]:.4f}, order3 {sup[3]:.4f}, {dt:.1f}s")


def check_5():
    t0 = time.perf_counter()
    res = run_audit(load_config(DEFAULT))
    dt = time.perf_counter() - t0
    ok = 0.33 <= res.mu_emp <= 0.47 and res.mu_emp > 0 and dt < 900
    return report(5, ok, f"default audit mu_emp = {res.mu_emp:.4f} in [0.33, 0.47], "
                         f"counts {res.counts.to_dict()}, {dt:.1f}s")


def check_6():
    cfg = load_config(DEFAULT)
    out = {}
    for order, threat in ((3, "hybrid"), (2, "black")):
        t0 = time.perf_counter()
        out[(order, threat)] = (run_audit(cfg.replace(workload_order=order, threat_model=threat)).mu_emp,
                                time.perf_counter() - t0)
    (m3, t3), (m2, t2) = out[(3, "hybrid")], out[(2, "black")]
    ok3 = 0.33 <= m3 <= 0.47 and t3 < 1200
    ok2 = m2 >= 0.33 and t2 < 1200
    report("6a", ok3, f"order-3 hybrid mu_emp = {m3:.4f} in [0.33, 0.47], {t3:.1f}s")
    report("6b", ok2, f"order-2 black mu_emp = {m2:.4f} >= 0.33, {t2:.1f}s")
    return ok3 and ok2


def check_7():
    cfg = load_config(DEFAULT)
    adv, unstable = [], []
    for seed in range(10):
        c = cfg.replace(master_seed=seed)
        trials = run_game(c.game)
        adv.append(run_audit(c, trials=trials).mu_emp)
        unstable.append(run_audit(c.replace(criterion="mu_estimate"), trials=trials).mu_emp)
    below = sum(u < a for u, a in zip(unstable, adv))
    collapsed = sum(u < 0.05 for u in unstable)
    ok = below >= 8 and collapsed >= 3
    return report(7, ok, f"mu_estimate below advantage in {below}/10 (need 8), "
                         f"collapsed < 0.05 in {collapsed}/10 (need 3); "
                         f"advantage {np.round(adv, 3).tolist()}, mu_estimate {np.round(unstable, 3).tolist()}")


def _gdp_rep(mu0, seed, n=5000):
    """Optimal threshold attack on an exact mu0-GDP pair: N(0,1) vs N(mu0,1)."""
    rng = np.random.default_rng([seed, int(mu0 * 1000)])
    out, inn = rng.normal(0.0, 1.0, n), rng.normal(mu0, 1.0, n)
    tau = mu0 / 2
    tp, fp = int(np.sum(inn >= tau)), int(np.sum(out >= tau))
    counts = ConfusionCounts(tp=tp, fp=fp, tn=n - fp, fn=n - tp)
    return posterior_mu_lower(counts, credibility=0.9, mc_seed=seed).mu_emp


def check_8():
    parts, ok = [], True
    for mu0 in (0.5, 1.0, 2.0):
        vals = np.array([_gdp_rep(mu0, s) for s in range(100)])
        sound = np.mean(vals <= mu0)
        power = np.min(vals) / mu0
        short = int(np.sum(vals < 0.8 * mu0))
        ok &= sound >= 0.85 and power >= 0.8
        parts.append(f"mu0={mu0}: sound {sound:.2f}, min ratio {power:.3f} "
                     f"({short}/100 below 0.8, median {np.median(vals) / mu0:.3f})")
    cover = np.mean([naive_whitebox_mu(r.normal(1, 1, 5000), r.normal(0, 1, 5000)) <= 1.0
                     for r in (np.random.default_rng(s) for s in range(200))])
    ok &= cover >= 0.85
    parts.append(f"chi2 coverage {cover:.3f}")
    return report(8, bool(ok), "; ".join(parts))


def check_9():
    with tempfile.TemporaryDirectory() as tmp:
        runs = []
        for i, threads in enumerate((1, 4)):
            out = Path(tmp) / f"run{i}"
            rc = cli_main(["audit", str(DEFAULT), "--out-dir", str(out), "--threads", str(threads)])
            runs.append((rc, out))
        same = all((runs[0][1] / f).read_bytes() == (runs[1][1] / f).read_bytes()
                   for f in ("summary.json", "tradeoff.csv"))
        ok = same and all(rc == 0 for rc, _ in runs)
    return report(9, ok, "summary.json and tradeoff.csv byte-identical across --threads 1/4"
                  if ok else "artifacts differ across runs")


CHECKS = [check_1, check_2, check_3, check_4, check_5, check_6, check_7, check_8, check_9]


@pytest.mark.parametrize("check", CHECKS, ids=[f"criterion_{i}" for i in range(1, 10)])
def test_criterion(check):
    assert check()


if __name__ == "__main__":
    results = [c() for c in CHECKS]
    sys.exit(0 if all(results) else 1)
