"""End-to-end audit pipeline: game -> attack -> estimation, plus the
ablation and higher-order-marginal sweeps built on top of it."""

from __future__ import annotations

import csv
import dataclasses
import json
import math
import os
import time
from dataclasses import dataclass, field

import numpy as np

from .accounting import PrivacyBudget, dp_tradeoff, gauss_tradeoff
from .attack import (
    CLASSIFIERS,
    CRITERIA,
    evaluate,
    feature_matrix,
    select_threshold,
    train_distinguisher,
)
from .estimation import (
    ConfusionCounts,
    naive_whitebox_mu,
    posterior_mu_lower,
    sweep,
    empirical_tradeoff,
)
from .game import GameConfig, TrialRecord, run_game, select, write_trials
from .plotting import bar_svg, tradeoff_svg

SCHEMA_VERSION = 1
ESTIMATORS = ("bayes", "chi2")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class AuditConfig:
    epsilon: float = 1.0
    delta: float = 1e-2
    n_trials: int = 10_000
    synth_size: int = 50
    out_size: int = 10
    workload_order: int = 1
    threat_model: str = "hybrid"
    split_train: int = 4_000
    split_val: int = 2_000
    split_test: int = 4_000
    master_seed: int = 0
    n_attributes: int = 3
    cardinality: int = 2
    criterion: str = "advantage"
    classifier: str = "gbdt"
    estimator: str = "bayes"
    credibility: float = 0.9
    mc_samples: int = 200_000
    mc_seed: int = -1  # -1: reuse master_seed
    baseline_confidence: float = 0.9

    def __post_init__(self):
        if self.criterion not in CRITERIA:
            raise ConfigError(f"criterion must be one of {CRITERIA}")
        if self.classifier not in CLASSIFIERS:
            raise ConfigError(f"classifier must be one of {CLASSIFIERS}")
        if self.estimator not in ESTIMATORS:
            raise ConfigError(f"estimator must be one of {ESTIMATORS}")
        if not 0 < self.credibility < 1 or not 0 < self.baseline_confidence < 1:
            raise ConfigError("credibility and baseline_confidence must lie in (0, 1)")
        if self.mc_samples <= 0:
            raise ConfigError("mc_samples must be positive")
        try:
            self.game
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    @property
    def game(self) -> GameConfig:
        return GameConfig(
            epsilon=self.epsilon, delta=self.delta, n_trials=self.n_trials,
            synth_size=self.synth_size, out_size=self.out_size,
            workload_order=self.workload_order, threat_model=self.threat_model,
            split=(self.split_train, self.split_val, self.split_test),
            master_seed=self.master_seed, n_attributes=self.n_attributes,
            cardinality=self.cardinality,
        )

    @property
    def effective_mc_seed(self) -> int:
        return self.master_seed if self.mc_seed < 0 else self.mc_seed

    def replace(self, **changes) -> "AuditConfig":
        return dataclasses.replace(self, **changes)

    def with_trials(self, n_trials: int) -> "AuditConfig":
        """Rescale the split 40/20/40 by (out, in) pairs; rounding goes to train."""
        if n_trials <= 0 or n_trials % 2:
            raise ConfigError("--trials must be a positive even integer")
        pairs = n_trials // 2
        val, test = pairs // 5, (2 * pairs) // 5
        return self.replace(n_trials=n_trials, split_train=2 * (pairs - val - test),
                            split_val=2 * val, split_test=2 * test)


def parse_config(text: str) -> AuditConfig:
    """Flat ``key = value`` lines; ``#`` starts a comment; unknown keys are rejected."""
    fields = {f.name: f.type for f in dataclasses.fields(AuditConfig)}
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, val = (s.strip() for s in line.split("=", 1))
        if key not in fields:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        kind = fields[key]
        try:
            if kind == "int":
                values[key] = int(val)
            elif kind == "float":
                values[key] = float(val)
            else:
                values[key] = val
        except ValueError:
            raise ConfigError(f"line {lineno}: bad {kind} value {val!r} for {key}") from None
    try:
        return AuditConfig(**values)
    except ConfigError:
        raise
    except (ValueError, TypeError) as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path) -> AuditConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            return parse_config(fh.read())
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc


def format_config(cfg: AuditConfig) -> str:
    return "".join(f"{k} = {v}\n" for k, v in dataclasses.asdict(cfg).items())


# -- single audit --------------------------------------------------------------

@dataclass
class AuditResult:
    config: AuditConfig
    budget: PrivacyBudget
    tau_star: float
    counts: ConfusionCounts
    mu_emp: float
    baseline_mu_lb: float | None
    wall_time: float
    trials: list[TrialRecord] = field(repr=False, default_factory=list)
    val_scores: np.ndarray = field(repr=False, default=None)
    val_labels: np.ndarray = field(repr=False, default=None)
    test_scores: np.ndarray = field(repr=False, default=None)
    test_labels: np.ndarray = field(repr=False, default=None)

    def summary(self) -> dict:
        """Reproducible summary (wall time is kept out on purpose)."""
        return {
            "schema_version": SCHEMA_VERSION,
            "config": dataclasses.asdict(self.config),
            "rho": self.budget.rho,
            "implied_mu": self.budget.mu_implied,
            "mu_direct": self.budget.mu_direct,
            "tau_star": _json_float(self.tau_star),
            "counts": self.counts.to_dict(),
            "mu_emp": self.mu_emp,
            "baseline_mu_lb": self.baseline_mu_lb,
            "seeds": {
                "master_seed": self.config.master_seed,
                "mc_seed": self.config.effective_mc_seed,
                "distinguisher_seed": self.config.master_seed,
            },
        }


def _json_float(x: float):
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return x


def _target_cell_samples(trials: list[TrialRecord]) -> tuple[np.ndarray, np.ndarray]:
    """Noisy count of the target's cell in the first measured marginal."""
    vals = np.array([t.marginals.tables[0].flat[-1] for t in trials])
    labels = np.array([t.label for t in trials], dtype=bool)
    return vals[labels], vals[~labels]


def run_audit(cfg: AuditConfig, threads: int = 1,
              trials: list[TrialRecord] | None = None) -> AuditResult:
    start = time.perf_counter()
    game = cfg.game
    budget = PrivacyBudget.from_dp(cfg.epsilon, cfg.delta)
    if trials is None:
        trials = run_game(game, threads=threads)
    domain, workload = game.domain, game.workload

    parts = {p: feature_matrix(select(trials, p), cfg.threat_model, domain, workload)
             for p in ("train", "val", "test")}
    X_tr, y_tr, _ = parts["train"]
    X_va, y_va, _ = parts["val"]
    X_te, y_te, _ = parts["test"]

    if len(np.unique(y_tr)) == 2:
        model = train_distinguisher(X_tr, y_tr, X_va, y_va, seed=cfg.master_seed,
                                    kind=cfg.classifier)
        val_scores, test_scores = model.score(X_va), model.score(X_te)
    else:
        # nothing to learn from: a constant, uninformative score
        val_scores, test_scores = np.full(len(y_va), 0.5), np.full(len(y_te), 0.5)

    tau = select_threshold(val_scores, y_va, cfg.criterion)
    counts = evaluate(test_scores, y_te, tau)

    test_trials = select(trials, "test")
    in_s, out_s = _target_cell_samples(test_trials) if test_trials else (np.zeros(0), np.zeros(0))
    baseline = None
    if len(in_s) >= 2 and len(out_s) >= 2:
        baseline = naive_whitebox_mu(in_s, out_s, cfg.baseline_confidence, sensitivity=1.0)

    if cfg.estimator == "chi2":
        mu_emp = baseline if baseline is not None else 0.0
    elif counts.positives and counts.negatives:
        mu_emp = posterior_mu_lower(counts, cfg.credibility, cfg.mc_samples,
                                    cfg.effective_mc_seed).mu_emp
    else:
        mu_emp = 0.0

    return AuditResult(cfg, budget, tau, counts, mu_emp, baseline,
                       time.perf_counter() - start, trials,
                       val_scores, y_va, test_scores, y_te)


# -- artifacts -----------------------------------------------------------------------

class ArtifactWriter:
    """Tracks files written into ``out_dir`` so a failed run can be rolled back."""

    def __init__(self, out_dir):
        self.out_dir = out_dir
        self.written: list[str] = []

    def path(self, name: str) -> str:
        os.makedirs(self.out_dir, exist_ok=True)
        p = os.path.join(self.out_dir, name)
        self.written.append(p)
        return p

    def rollback(self):
        for p in self.written:
            try:
                os.remove(p)
            except FileNotFoundError:
                pass
        self.written.clear()


def _dump_json(path, obj):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _write_rows(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def write_audit_artifacts(res: AuditResult, writer: ArtifactWriter) -> None:
    cfg, b = res.config, res.budget
    write_trials(writer.path("trials.jsonl"), _attach_scores(res))

    sw = sweep(res.val_scores, res.val_labels) if len(res.val_labels) else None
    rows = []
    if sw is not None:
        rows = [[repr(float(t)), repr(float(a)), repr(float(f)), repr(float(v))]
                for t, a, f, v in zip(sw.threshold, sw.fpr, sw.fnr, sw.advantage)]
    _write_rows(writer.path("valid_sweep.csv"), ["threshold", "fpr", "fnr", "advantage"], rows)

    labels = res.test_labels.astype(bool)
    if labels.any() and not labels.all():
        empirical_tradeoff(res.test_scores, labels).to_csv(writer.path("tradeoff.csv"))
    else:
        _write_rows(writer.path("tradeoff.csv"), ["threshold", "fpr", "fnr"], [])

    grid = np.linspace(0.0, 1.0, 201)
    series = []
    if sw is not None and len(sw.threshold) > 1:
        series.append(("empirical (validation)", sw.fpr, sw.fnr))
    series += [
        (f"implied mu={b.mu_implied:.3f} (via zCDP)", grid, gauss_tradeoff(b.mu_implied, grid)),
        (f"direct mu={b.mu_direct:.3f}", grid, gauss_tradeoff(b.mu_direct, grid)),
        (f"({cfg.epsilon:g},{cfg.delta:g})-DP", grid, dp_tradeoff(cfg.epsilon, cfg.delta, grid)),
    ]
    pts = []
    if res.counts.positives and res.counts.negatives:
        pts.append(("test", res.counts.fpr, res.counts.fnr))
    tradeoff_svg(writer.path("tradeoff.svg"), series, pts,
                 title=f"mu_emp={res.mu_emp:.3f} vs implied {b.mu_implied:.3f}")
    _dump_json(writer.path("summary.json"), res.summary())
    _dump_json(writer.path("timing.json"), {"wall_time": res.wall_time})


def _attach_scores(res: AuditResult) -> list[TrialRecord]:
    scores = {}
    for part, sc in (("val", res.val_scores), ("test", res.test_scores)):
        for t, s in zip(select(res.trials, part), sc):
            scores[t.trial_id] = float(s)
    return [dataclasses.replace(t, score=scores.get(t.trial_id)) for t in res.trials]


# -- sweeps -------------------------------------------------------------------------

ABLATION_HEADER = ["variant", "mu_emp", "implied_mu", "tau_star", "tp", "fp", "tn", "fn",
                   "baseline_mu_lb"]


def ablation_variants(cfg: AuditConfig) -> list[tuple[str, AuditConfig]]:
    return [
        ("default", cfg),
        ("criterion=mu_estimate", cfg.replace(criterion="mu_estimate")),
        ("estimation=chi2_baseline", cfg.replace(estimator="chi2")),
        ("out_size=0", cfg.replace(out_size=0)),
        ("out_size=100", cfg.replace(out_size=100)),
        ("classifier=logistic", cfg.replace(classifier="logistic")),
        ("threat=black", cfg.replace(threat_model="black")),
        ("threat=white", cfg.replace(threat_model="white")),
    ]


def marginal_variants(cfg: AuditConfig) -> list[tuple[str, AuditConfig]]:
    out = []
    for order in (1, 2, 3):
        for threat in ("black", "hybrid"):
            if order <= cfg.n_attributes:
                out.append((f"order={order},threat={threat}",
                            cfg.replace(workload_order=order, threat_model=threat)))
    return out


def run_variants(variants, threads: int = 1) -> list[tuple[str, AuditResult]]:
    """Runs each variant, sharing game runs between variants with equal game configs."""
    games: dict[GameConfig, list[TrialRecord]] = {}
    results = []
    for name, cfg in variants:
        key = dataclasses.replace(cfg.game, threat_model="hybrid")
        if key not in games:
            games[key] = run_game(cfg.game, threads=threads)
        results.append((name, run_audit(cfg, threads=threads, trials=games[key])))
    return results


def variant_row(name: str, res: AuditResult) -> list:
    c = res.counts
    return [name, repr(res.mu_emp), repr(res.budget.mu_implied), repr(_json_float(res.tau_star)),
            c.tp, c.fp, c.tn, c.fn,
            "" if res.baseline_mu_lb is None else repr(res.baseline_mu_lb)]


def write_variant_artifacts(results, writer: ArtifactWriter, stem: str, title: str) -> None:
    _write_rows(writer.path(f"{stem}.csv"), ABLATION_HEADER,
                [variant_row(n, r) for n, r in results])
    ref = results[0][1].budget.mu_implied if results else None
    bar_svg(writer.path(f"{stem}.svg"), [n for n, _ in results],
            [r.mu_emp for _, r in results], reference=ref, title=title)
