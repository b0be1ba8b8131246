"""The adversary: query/marginal features, a learned distinguisher,
validation threshold selection and test evaluation."""

from __future__ import annotations

import csv
import itertools
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

import numpy as np

from .boosting import GradientBoostedTrees, LogisticDistinguisher
from .estimation import ConfusionCounts, _mu_hat, sweep
from .game import THREAT_MODELS, TrialRecord
from .mechanism import DomainSpec, MarginalWorkload

CRITERIA = ("advantage", "mu_estimate")
CLASSIFIERS = ("gbdt", "logistic")


@dataclass(frozen=True, eq=False)
class FeatureVector:
    values: np.ndarray
    layout: tuple[str, ...]


@lru_cache(maxsize=32)
def _queries(shape: tuple[int, ...]) -> tuple[np.ndarray, tuple[str, ...]]:
    """0/1 matrix mapping the flattened contingency table to all wildcard queries."""
    choices = [[None, *range(c)] for c in shape]
    patterns = list(itertools.product(*choices))
    cells = np.array(list(np.ndindex(*shape))).reshape(-1, len(shape))
    Q = np.zeros((len(patterns), cells.shape[0]))
    names = []
    for i, pat in enumerate(patterns):
        hit = np.ones(cells.shape[0], dtype=bool)
        for a, v in enumerate(pat):
            if v is not None:
                hit &= cells[:, a] == v
        Q[i] = hit
        names.append("q[" + ",".join("*" if v is None else str(v) for v in pat) + "]")
    Q.setflags(write=False)
    return Q, tuple(names)


def _marginal_names(domain: DomainSpec, workload: MarginalWorkload) -> tuple[str, ...]:
    names = []
    for c in workload.cliques:
        tag = "m(" + ",".join(map(str, c)) + ")"
        for cell in np.ndindex(*(domain.shape[a] for a in c)):
            names.append(tag + "[" + ",".join(map(str, cell)) + "]")
    return tuple(names)


def feature_layout(threat_model: str, domain: DomainSpec,
                   workload: MarginalWorkload) -> tuple[str, ...]:
    if threat_model not in THREAT_MODELS:
        raise ValueError(f"unknown threat model {threat_model!r}")
    black = _queries(domain.shape)[1] if threat_model in ("black", "hybrid") else ()
    white = _marginal_names(domain, workload) if threat_model in ("white", "hybrid") else ()
    return black + white


def extract_features(trial: TrialRecord, threat_model: str, domain: DomainSpec,
                     workload: MarginalWorkload) -> FeatureVector:
    """Black-box: counts of every conjunctive wildcard query over the synthetic
    data. White-box: flattened noisy marginal cells. Hybrid: black then white."""
    layout = feature_layout(threat_model, domain, workload)
    parts = []
    if threat_model in ("black", "hybrid"):
        if trial.synthetic.domain.shape != domain.shape:
            raise ValueError("synthetic data does not match the domain")
        Q, _ = _queries(domain.shape)
        parts.append(Q @ trial.synthetic.histogram().ravel())
    if threat_model in ("white", "hybrid"):
        if trial.marginals.cliques != workload.cliques:
            raise ValueError("trial marginals do not match the workload")
        parts.append(trial.marginals.flat())
    return FeatureVector(np.concatenate(parts).astype(float), layout)


def feature_matrix(trials: Sequence[TrialRecord], threat_model: str, domain: DomainSpec,
                   workload: MarginalWorkload) -> tuple[np.ndarray, np.ndarray, tuple[str, ...]]:
    layout = feature_layout(threat_model, domain, workload)
    X = np.zeros((len(trials), len(layout)))
    for i, t in enumerate(trials):
        X[i] = extract_features(t, threat_model, domain, workload).values
    y = np.array([t.label for t in trials], dtype=np.int64)
    return X, y, layout


def export_features_csv(path, X, y, layout) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["label", *layout])
        for row, lab in zip(X, y):
            w.writerow([int(lab), *(repr(float(v)) for v in row)])


@dataclass
class Distinguisher:
    model: object
    kind: str
    training_meta: dict = field(default_factory=dict)

    def score(self, X) -> np.ndarray:
        if len(X) == 0:
            return np.zeros(0)
        return np.clip(self.model.predict_proba(X), 0.0, 1.0)


def train_distinguisher(X_train, y_train, X_val, y_val, seed: int = 0,
                        kind: str = "gbdt") -> Distinguisher:
    """Fit the attack classifier; an empty validation set disables early stopping."""
    y_train = np.asarray(y_train)
    if len(y_train) == 0 or len(np.unique(y_train)) < 2:
        raise ValueError("training set must contain both classes")
    if kind == "gbdt":
        model = GradientBoostedTrees(seed=seed).fit(X_train, y_train, X_val, y_val)
        meta = {"seed": seed, "rounds": model.best_rounds_, "val_loss": model.val_loss_}
    elif kind == "logistic":
        model = LogisticDistinguisher(seed=seed).fit(X_train, y_train)
        meta = {"seed": seed, "rounds": 0, "val_loss": []}
    else:
        raise ValueError(f"unknown classifier {kind!r}")
    return Distinguisher(model, kind, meta)


def select_threshold(scores, labels, criterion: str = "advantage") -> float:
    """Threshold maximizing the criterion over the validation grid.

    ``advantage`` is TPR - FPR; ``mu_estimate`` is the plug-in mu of the
    confusion counts, which chases extreme thresholds. Ties go to the
    smaller FPR, then to the larger threshold. No data means predicting
    nothing (+inf).
    """
    if criterion not in CRITERIA:
        raise ValueError(f"unknown criterion {criterion!r}")
    labels = np.asarray(labels).astype(bool)
    if len(labels) == 0:
        return float("inf")
    s = sweep(scores, labels)
    n_pos, n_neg = int(labels.sum()), int((~labels).sum())
    if criterion == "advantage":
        # exact integer comparison: TPR - FPR scaled by n_pos * n_neg
        crit = s.tp * n_neg - s.fp * n_pos
    else:
        if n_pos == 0 or n_neg == 0:
            return float("inf")
        crit = _mu_hat(s.fp, n_neg, s.fn, n_pos)
    best = np.lexsort((-s.threshold, s.fp, -crit))[0]
    return float(s.threshold[best])


def evaluate(scores, labels, tau: float) -> ConfusionCounts:
    scores = np.asarray(scores, dtype=float)
    labels = np.asarray(labels).astype(bool)
    pred = scores >= tau
    return ConfusionCounts(
        tp=int(np.sum(pred & labels)),
        fp=int(np.sum(pred & ~labels)),
        tn=int(np.sum(~pred & ~labels)),
        fn=int(np.sum(~pred & labels)),
    )
