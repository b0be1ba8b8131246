"""The distinguishing game: worst-case neighbors, many independent trainings,
labeled and partitioned releases for the adversary."""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .accounting import rho_from_dp
from .mechanism import (
    Dataset,
    DomainSpec,
    MarginalWorkload,
    NoisyMarginals,
    build_workload,
    generate,
    measure,
)

THREAT_MODELS = ("black", "white", "hybrid")
PARTITIONS = ("train", "val", "test")


@dataclass(frozen=True)
class GameConfig:
    epsilon: float = 1.0
    delta: float = 1e-2
    n_trials: int = 10_000
    synth_size: int = 50
    out_size: int = 10
    workload_order: int = 1
    threat_model: str = "hybrid"
    split: tuple[int, int, int] = (4_000, 2_000, 4_000)
    master_seed: int = 0
    n_attributes: int = 3
    cardinality: int = 2

    def __post_init__(self):
        object.__setattr__(self, "split", tuple(int(s) for s in self.split))
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        if not 0 < self.delta < 1:
            raise ValueError("delta must lie in (0, 1)")
        if self.n_trials <= 0 or self.n_trials % 2:
            raise ValueError("n_trials must be a positive even integer")
        if self.synth_size < 0 or self.out_size < 0:
            raise ValueError("synth_size and out_size must be nonnegative")
        if self.workload_order not in (1, 2, 3) or self.workload_order > self.n_attributes:
            raise ValueError("workload_order must be 1, 2 or 3 and at most n_attributes")
        if self.threat_model not in THREAT_MODELS:
            raise ValueError(f"threat_model must be one of {THREAT_MODELS}")
        if len(self.split) != 3 or any(s < 0 or s % 2 for s in self.split):
            raise ValueError("split must be three nonnegative even sizes")
        if sum(self.split) != self.n_trials:
            raise ValueError("split must sum to n_trials")
        if not 0 <= self.master_seed < 2**64:
            raise ValueError("master_seed must be a 64-bit unsigned integer")

    @property
    def domain(self) -> DomainSpec:
        return DomainSpec(tuple((f"a{i}", self.cardinality) for i in range(self.n_attributes)))

    @property
    def workload(self) -> MarginalWorkload:
        return build_workload(self.domain, self.workload_order)


@dataclass(frozen=True, eq=False)
class TrialRecord:
    trial_id: int
    label: int
    partition: str
    synthetic: Dataset
    marginals: NoisyMarginals
    seed: int
    features: np.ndarray | None = field(default=None, repr=False)
    score: float | None = None

    def __eq__(self, other) -> bool:
        if not isinstance(other, TrialRecord):
            return NotImplemented
        same_feats = (self.features is None and other.features is None) or (
            self.features is not None
            and other.features is not None
            and np.array_equal(self.features, other.features)
        )
        return (
            (self.trial_id, self.label, self.partition, self.seed, self.score)
            == (other.trial_id, other.label, other.partition, other.seed, other.score)
            and self.synthetic == other.synthetic
            and self.marginals == other.marginals
            and same_feats
        )


def build_neighbors(domain: DomainSpec, out_size: int) -> tuple[Dataset, Dataset]:
    """``out_size`` all-minimum records, and the same plus one all-maximum target."""
    if out_size < 0:
        raise ValueError("out_size must be nonnegative")
    d = len(domain)
    d_out = np.zeros((out_size, d), dtype=np.int64)
    target = np.asarray(domain.shape, dtype=np.int64)[None, :] - 1
    return Dataset(domain, d_out), Dataset(domain, np.vstack([d_out, target]))


def trial_seed(master_seed: int, trial_id: int) -> int:
    """Keyed derivation of the per-trial stream key (hash of master seed and id)."""
    ss = np.random.SeedSequence([int(master_seed), int(trial_id)])
    return int(ss.generate_state(1, np.uint64)[0])


def trial_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=seed))


def partition_of(trial_id: int, split: tuple[int, int, int]) -> str:
    """Contiguous blocks of (out, in) pairs, so every partition is balanced."""
    if trial_id < split[0]:
        return "train"
    if trial_id < split[0] + split[1]:
        return "val"
    return "test"


def run_trial(config: GameConfig, trial_id: int, rho: float,
              neighbors: tuple[Dataset, Dataset] | None = None) -> TrialRecord:
    domain = config.domain
    d_out, d_in = neighbors or build_neighbors(domain, config.out_size)
    label = trial_id % 2
    seed = trial_seed(config.master_seed, trial_id)
    rng = trial_rng(seed)
    marg = measure(d_in if label else d_out, config.workload, rho, rng)
    synth = generate(marg, config.synth_size, rng, domain)
    return TrialRecord(trial_id, label, partition_of(trial_id, config.split), synth, marg, seed)


def run_game(config: GameConfig, threads: int = 1) -> list[TrialRecord]:
    rho = rho_from_dp(config.epsilon, config.delta)
    neighbors = build_neighbors(config.domain, config.out_size)

    def work(t: int) -> TrialRecord:
        return run_trial(config, t, rho, neighbors)

    ids = range(config.n_trials)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            trials = list(pool.map(work, ids, chunksize=256))
    else:
        trials = [work(t) for t in ids]
    if len({t.seed for t in trials}) != len(trials):
        raise RuntimeError("per-trial seed collision")
    return trials


def select(trials: Iterable[TrialRecord], partition: str) -> list[TrialRecord]:
    return [t for t in trials if t.partition == partition]


# -- JSON-lines persistence ----------------------------------------------------

def trial_to_json(trial: TrialRecord) -> dict:
    obj = {
        "trial_id": trial.trial_id,
        "label": trial.label,
        "partition": trial.partition,
        "synthetic": trial.synthetic.records.tolist(),
        "marginals": {
            "cliques": [list(c) for c in trial.marginals.cliques],
            "tables": [t.tolist() for t in trial.marginals.tables],
            "sigma": trial.marginals.sigma,
        },
        "seed": trial.seed,
    }
    if trial.features is not None:
        obj["features"] = trial.features.tolist()
    if trial.score is not None:
        obj["score"] = trial.score
    return obj


def trial_from_json(obj: dict, domain: DomainSpec) -> TrialRecord:
    m = obj["marginals"]
    marg = NoisyMarginals(
        tuple(tuple(c) for c in m["cliques"]),
        tuple(np.asarray(t, dtype=float) for t in m["tables"]),
        float(m["sigma"]),
    )
    feats = obj.get("features")
    return TrialRecord(
        trial_id=int(obj["trial_id"]),
        label=int(obj["label"]),
        partition=obj["partition"],
        synthetic=Dataset(domain, np.asarray(obj["synthetic"], dtype=np.int64).reshape(-1, len(domain))),
        marginals=marg,
        seed=int(obj["seed"]),
        features=None if feats is None else np.asarray(feats, dtype=float),
        score=obj.get("score"),
    )


def write_trials(path, trials: Iterable[TrialRecord]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for t in trials:
            fh.write(json.dumps(trial_to_json(t), separators=(",", ":")))
            fh.write("\n")


def read_trials(path, domain: DomainSpec) -> list[TrialRecord]:
    with open(path, encoding="utf-8") as fh:
        return [trial_from_json(json.loads(line), domain) for line in fh if line.strip()]
