"""Reduced MST/AIM: Gaussian-noised marginals on a fixed graph, then sampling.

With selection fixed, the whole zCDP budget goes to measurement. Each of the
``m`` cliques gets rho/m, i.e. Gaussian noise with sigma = sqrt(m / (2 rho))
under L2 sensitivity 1 (add/remove one record moves one cell per clique).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np


@dataclass(frozen=True)
class DomainSpec:
    attributes: tuple[tuple[str, int], ...]

    def __post_init__(self):
        attrs = tuple((str(n), int(c)) for n, c in self.attributes)
        if not attrs:
            raise ValueError("domain needs at least one attribute")
        if any(c < 2 for _, c in attrs):
            raise ValueError("every attribute needs cardinality >= 2")
        object.__setattr__(self, "attributes", attrs)

    @classmethod
    def binary(cls, n_attributes: int = 3) -> "DomainSpec":
        return cls(tuple((f"a{i}", 2) for i in range(n_attributes)))

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(c for _, c in self.attributes)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(n for n, _ in self.attributes)

    @property
    def size(self) -> int:
        return math.prod(self.shape)

    def __len__(self) -> int:
        return len(self.attributes)


@dataclass(frozen=True, eq=False)
class Dataset:
    """A multiset of records; ``records`` is an (n, d) integer array."""

    domain: DomainSpec
    records: np.ndarray = field(repr=False)

    def __post_init__(self):
        rec = np.asarray(self.records, dtype=np.int64).reshape(-1, len(self.domain))
        if rec.size and (np.any(rec < 0) or np.any(rec >= np.asarray(self.domain.shape))):
            raise ValueError("record outside the domain")
        rec.setflags(write=False)
        object.__setattr__(self, "records", rec)

    def __len__(self) -> int:
        return self.records.shape[0]

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Dataset)
            and self.domain == other.domain
            and np.array_equal(self.records, other.records)
        )

    def histogram(self) -> np.ndarray:
        """Full contingency table over the domain."""
        flat = np.ravel_multi_index(self.records.T, self.domain.shape) if len(self) else np.empty(0, int)
        return np.bincount(flat, minlength=self.domain.size).reshape(self.domain.shape)


@dataclass(frozen=True)
class MarginalWorkload:
    cliques: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        cl = tuple(tuple(int(a) for a in c) for c in self.cliques)
        if not cl:
            raise ValueError("empty workload")
        if len(set(cl)) != len(cl):
            raise ValueError("duplicate cliques")
        if len({len(c) for c in cl}) != 1:
            raise ValueError("all cliques must have the same order")
        object.__setattr__(self, "cliques", cl)

    @property
    def order(self) -> int:
        return len(self.cliques[0])

    def __len__(self) -> int:
        return len(self.cliques)


@dataclass(frozen=True, eq=False)
class NoisyMarginals:
    cliques: tuple[tuple[int, ...], ...]
    tables: tuple[np.ndarray, ...] = field(repr=False)
    sigma: float

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, NoisyMarginals)
            and self.cliques == other.cliques
            and self.sigma == other.sigma
            and len(self.tables) == len(other.tables)
            and all(np.array_equal(a, b) for a, b in zip(self.tables, other.tables))
        )

    def flat(self) -> np.ndarray:
        return np.concatenate([t.ravel() for t in self.tables])


def build_workload(domain: DomainSpec, order: int) -> MarginalWorkload:
    """Consecutive ``order``-tuples along the attribute order (a fixed path graph)."""
    d = len(domain)
    if order < 1 or order > d:
        raise ValueError(f"order must lie in [1, {d}]")
    return MarginalWorkload(tuple(tuple(range(j, j + order)) for j in range(d - order + 1)))


def noise_scale(rho: float, n_cliques: int) -> float:
    return math.sqrt(n_cliques / (2.0 * rho))


def true_marginal(data: Dataset, clique: Sequence[int]) -> np.ndarray:
    hist = data.histogram()
    drop = tuple(i for i in range(len(data.domain)) if i not in clique)
    return hist.sum(axis=drop).astype(float)


def measure(
    data: Dataset, workload: MarginalWorkload, rho: float, rng: np.random.Generator
) -> NoisyMarginals:
    if not rho > 0:
        raise ValueError("rho must be positive")
    sigma = noise_scale(rho, len(workload))
    tables = []
    for clique in workload.cliques:
        counts = true_marginal(data, clique)
        tables.append(counts + rng.normal(0.0, sigma, size=counts.shape))
    return NoisyMarginals(workload.cliques, tuple(tables), sigma)


def _is_path(cliques) -> bool:
    k = len(cliques[0])
    return all(c == tuple(range(j, j + k)) for j, c in enumerate(cliques))


def _normalize(table: np.ndarray) -> np.ndarray:
    t = np.clip(table, 0.0, None)
    s = t.sum()
    if not s > 0:
        return np.full(t.shape, 1.0 / t.size)
    return t / s


def _inverse_cdf(cdf_rows: np.ndarray, u: np.ndarray) -> np.ndarray:
    idx = (u[:, None] >= cdf_rows).sum(axis=1)
    return np.minimum(idx, cdf_rows.shape[1] - 1)


def generate(marginals: NoisyMarginals, n: int, rng: np.random.Generator,
             domain: DomainSpec | None = None) -> Dataset:
    """Sample ``n`` records from the chain model implied by the noisy tables.

    The first clique is sampled jointly; each later clique contributes the
    conditional of its last attribute given the attributes it shares with
    its predecessor. For singleton cliques this is the product of the
    per-attribute distributions.
    """
    cliques = marginals.cliques
    if not _is_path(cliques):
        raise ValueError("generation supports path-structured workloads only")
    k = len(cliques[0])
    n_attr = len(cliques) + k - 1
    shape = [0] * n_attr
    for c, t in zip(cliques, marginals.tables):
        for a, s in zip(c, t.shape):
            shape[a] = s
    if domain is None:
        domain = DomainSpec(tuple((f"a{i}", s) for i, s in enumerate(shape)))
    elif tuple(shape) != domain.shape:
        raise ValueError("marginals do not match the domain")

    out = np.zeros((n, n_attr), dtype=np.int64)
    if n == 0:
        return Dataset(domain, out)

    root = _normalize(marginals.tables[0]).ravel()
    flat = _inverse_cdf(np.cumsum(root)[None, :], rng.random(n))
    out[:, :k] = np.stack(np.unravel_index(flat, marginals.tables[0].shape), axis=1)

    for j in range(1, len(cliques)):
        t = np.clip(marginals.tables[j], 0.0, None)
        rows = t.reshape(-1, t.shape[-1])
        mass = rows.sum(axis=1, keepdims=True)
        cond = np.where(mass > 0, rows / np.where(mass > 0, mass, 1.0), 1.0 / rows.shape[1])
        parents = cliques[j][:-1]
        if parents:
            pidx = np.ravel_multi_index(out[:, list(parents)].T, t.shape[:-1])
        else:
            pidx = np.zeros(n, dtype=np.int64)
        out[:, cliques[j][-1]] = _inverse_cdf(np.cumsum(cond, axis=1)[pidx], rng.random(n))
    return Dataset(domain, out)
