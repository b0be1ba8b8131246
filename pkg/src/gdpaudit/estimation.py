"""From attack outcomes to privacy statements: empirical tradeoff curves,
the Bayesian lower bound on mu, and the naive chi-square baseline."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy import special as _sp

from .special import chi2_ppf, norm_cdf, norm_ppf

MU_MAX = 20.0
MU_TOL = 1e-4
DEFAULT_MC_SAMPLES = 200_000


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    fp: int
    tn: int
    fn: int

    def __post_init__(self):
        if min(self.tp, self.fp, self.tn, self.fn) < 0:
            raise ValueError("counts must be nonnegative")

    @property
    def positives(self) -> int:
        return self.tp + self.fn

    @property
    def negatives(self) -> int:
        return self.fp + self.tn

    @property
    def fpr(self) -> float:
        return self.fp / self.negatives if self.negatives else 0.0

    @property
    def fnr(self) -> float:
        return self.fn / self.positives if self.positives else 0.0

    @property
    def tpr(self) -> float:
        return 1.0 - self.fnr

    def to_dict(self) -> dict:
        return asdict(self)


# -- threshold sweep -----------------------------------------------------------

def threshold_grid(scores) -> np.ndarray:
    """-inf, midpoints between consecutive distinct scores, +inf (ascending)."""
    u = np.unique(np.asarray(scores, dtype=float))
    mids = u[:-1] + 0.5 * (u[1:] - u[:-1])
    # a midpoint that rounds onto the lower score would misclassify it
    mids = np.where(mids <= u[:-1], u[1:], mids)
    return np.concatenate([[-np.inf], mids, [np.inf]])


@dataclass(frozen=True)
class Sweep:
    threshold: np.ndarray
    tp: np.ndarray
    fp: np.ndarray
    tn: np.ndarray
    fn: np.ndarray

    @property
    def fpr(self) -> np.ndarray:
        n = self.fp + self.tn
        return self.fp / np.maximum(n, 1)

    @property
    def fnr(self) -> np.ndarray:
        p = self.tp + self.fn
        return self.fn / np.maximum(p, 1)

    @property
    def advantage(self) -> np.ndarray:
        return (1.0 - self.fnr) - self.fpr


def sweep(scores, labels) -> Sweep:
    """Confusion counts at every grid threshold; predict 1 iff score >= threshold."""
    scores = np.asarray(scores, dtype=float)
    labels = np.asarray(labels).astype(bool)
    thr = threshold_grid(scores)
    pos = np.sort(scores[labels])
    neg = np.sort(scores[~labels])
    tp = len(pos) - np.searchsorted(pos, thr, side="left")
    fp = len(neg) - np.searchsorted(neg, thr, side="left")
    return Sweep(thr, tp, fp, len(neg) - fp, len(pos) - tp)


# -- tradeoff curve --------------------------------------------------------------

@dataclass(frozen=True)
class TradeoffCurve:
    threshold: np.ndarray
    alpha: np.ndarray  # FPR
    beta: np.ndarray  # FNR

    def __len__(self) -> int:
        return len(self.threshold)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["threshold", "fpr", "fnr"])
            for t, a, b in zip(self.threshold, self.alpha, self.beta):
                w.writerow([repr(float(t)), repr(float(a)), repr(float(b))])


def empirical_tradeoff(scores, labels) -> TradeoffCurve:
    labels = np.asarray(labels).astype(bool)
    if labels.all() or not labels.any():
        raise ValueError("both classes are required")
    s = sweep(scores, labels)
    return TradeoffCurve(s.threshold, s.fpr, s.fnr)


# -- point estimate -------------------------------------------------------------

def _smoothed_rate(k, n):
    k = np.asarray(k, dtype=float)
    n = np.asarray(n, dtype=float)
    r = k / n
    r = np.where(k == 0, 0.5 / n, r)
    return np.where(k == n, (n - 0.5) / n, r)


def mu_point_estimate(counts: ConfusionCounts) -> float:
    """mu placing (FPR, FNR) exactly on G_mu; rates of 0 or 1 use half-count smoothing."""
    if counts.positives == 0 or counts.negatives == 0:
        raise ValueError("both classes need counts")
    return float(_mu_hat(counts.fp, counts.negatives, counts.fn, counts.positives))


def _mu_hat(fp, n_neg, fn, n_pos):
    a = _smoothed_rate(fp, n_neg)
    b = _smoothed_rate(fn, n_pos)
    return np.maximum(0.0, -norm_ppf(a) - norm_ppf(b))


# -- Bayesian lower bound ---------------------------------------------------------

@dataclass(frozen=True)
class MuEstimate:
    mu_emp: float
    credibility: float
    posterior_spec: str
    mc_samples: int
    mc_seed: int
    counts: ConfusionCounts

    def to_dict(self) -> dict:
        return {
            "mu_emp": self.mu_emp,
            "credibility": self.credibility,
            "counts": self.counts.to_dict(),
            "seeds": {"mc_seed": self.mc_seed},
            "mc_samples": self.mc_samples,
            "posterior_spec": self.posterior_spec,
        }

    def to_json(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")


def posterior_samples(counts: ConfusionCounts, mc_samples: int, mc_seed: int):
    """Draws (FPR, FNR) from independent Jeffreys Beta posteriors.

    Inverse-CDF sampling from a fixed pair of uniform streams: with the seed
    held fixed, shifting a count moves every draw the same way.
    """
    rng = np.random.default_rng(mc_seed)
    u = rng.random(mc_samples)
    v = rng.random(mc_samples)
    alpha = _sp.betaincinv(counts.fp + 0.5, counts.tn + 0.5, u)
    beta = _sp.betaincinv(counts.fn + 0.5, counts.tp + 0.5, v)
    return alpha, beta


def violation_fraction(alpha, beta, mu) -> np.ndarray:
    """V(mu): share of posterior draws with beta < G_mu(alpha)."""
    z = -norm_ppf(alpha)
    return np.mean(norm_cdf(z - np.asarray(mu)[..., None]) > beta, axis=-1)


def posterior_mu_lower(counts: ConfusionCounts, credibility: float = 0.9,
                       mc_samples: int = DEFAULT_MC_SAMPLES, mc_seed: int = 0) -> MuEstimate:
    """Largest mu whose violation region keeps at least ``credibility`` posterior mass."""
    if counts.positives == 0 or counts.negatives == 0:
        raise ValueError("both classes need counts")
    if not 0.0 < credibility < 1.0:
        raise ValueError("credibility must lie in (0, 1)")
    alpha, beta = posterior_samples(counts, mc_samples, mc_seed)

    # beta < Phi(z - mu)  <=>  z - Phi^{-1}(beta) > mu, so V(mu) reduces to
    # counting sorted per-draw levels above mu
    with np.errstate(invalid="ignore"):
        level = np.sort(-norm_ppf(alpha) - norm_ppf(beta))
    level = np.nan_to_num(level, nan=-np.inf)

    def V(mu: float) -> float:
        return (mc_samples - np.searchsorted(level, mu, side="right")) / mc_samples

    grid = [V(m) for m in np.linspace(0.0, MU_MAX, 41)]
    assert all(a >= b for a, b in zip(grid, grid[1:])), "V(mu) must be nonincreasing"

    spec = "independent Beta(fp+1/2, tn+1/2) x Beta(fn+1/2, tp+1/2) (Jeffreys priors)"
    if V(0.0) < credibility:
        return MuEstimate(0.0, credibility, spec, mc_samples, mc_seed, counts)
    lo, hi = 0.0, MU_MAX
    if V(hi) >= credibility:
        return MuEstimate(hi, credibility, spec, mc_samples, mc_seed, counts)
    while hi - lo > MU_TOL:
        mid = 0.5 * (lo + hi)
        if V(mid) >= credibility:
            lo = mid
        else:
            hi = mid
    return MuEstimate(lo, credibility, spec, mc_samples, mc_seed, counts)


# -- naive white-box baseline ----------------------------------------------------------

def naive_whitebox_mu(in_samples, out_samples, confidence: float = 0.9,
                      sensitivity: float = 1.0) -> float:
    """Lower bound on sensitivity / sigma from a chi-square upper bound on the
    pooled noise variance of one released marginal cell."""
    x = np.asarray(in_samples, dtype=float)
    y = np.asarray(out_samples, dtype=float)
    if len(x) < 2 or len(y) < 2:
        raise ValueError("each group needs at least two samples")
    if not 0.0 < confidence < 1.0:
        raise ValueError("confidence must lie in (0, 1)")
    dof = len(x) + len(y) - 2
    ss = float(np.sum((x - x.mean()) ** 2) + np.sum((y - y.mean()) ** 2))
    s2 = ss / dof
    if not s2 > 0:
        raise ValueError("zero pooled variance")
    var_ub = dof * s2 / chi2_ppf(dof, 1.0 - confidence)
    return sensitivity / math.sqrt(var_ub)
