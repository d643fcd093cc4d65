"""Exact clustering posteriors from iterated subset convolutions.

With ``f(X) = log f_prior(X) + log f_lik(X)`` and cardinality weights ``w_k``:

- ``p(k | y)`` is proportional to ``w_k * f^(k)(U)``, the k-fold convolution
  evaluated at the full item set;
- ``p(i ~ j | y)`` sums ``k * w_k * f(S) * f^(k-1)(U \\ S)`` over clusters
  ``S`` containing both items and over k;
- optimal k-partitions come from the same recursion over the max-product
  semiring.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .combinatorics import LogNumberTable, build_tables, log_factorial
from .errors import DomainError, EvidenceZeroError
from .priors import DIRICHLET_PROCESS, PriorSpec, log_weights
from .subsets import (
    DEFAULT_SCALE_BITS,
    SubsetTable,
    iterate_convolutions,
    max_convolve,
    popcounts,
)

OUTPUTS = ("posterior-k", "cooccurrence", "modes")


@dataclass(frozen=True, eq=False)
class PosteriorSummary:
    n: int
    log_evidence: float
    posterior_k: np.ndarray
    prior_k: np.ndarray


@dataclass(frozen=True, eq=False)
class CooccurrenceMatrix:
    n: int
    entries: np.ndarray

    def __getitem__(self, ij):
        return self.entries[ij]


@dataclass(frozen=True, eq=False)
class Partition:
    """An unordered partition stored as canonical (sorted) cluster bitmasks."""

    n: int
    clusters: tuple
    log_posterior: float = math.nan

    def __post_init__(self):
        clusters = tuple(sorted((int(c) for c in self.clusters), key=lambda m: m & -m))
        union = 0
        for c in clusters:
            if c == 0 or union & c:
                raise DomainError("clusters must be nonempty and pairwise disjoint")
            union |= c
        if union != (1 << self.n) - 1:
            raise DomainError("clusters do not cover the item set")
        object.__setattr__(self, "clusters", clusters)

    @property
    def k(self) -> int:
        return len(self.clusters)

    @property
    def probability(self) -> float:
        return math.exp(self.log_posterior)

    def labels(self) -> np.ndarray:
        out = np.empty(self.n, dtype=int)
        for j, c in enumerate(self.clusters):
            for i in range(self.n):
                if c >> i & 1:
                    out[i] = j
        return out

    def as_lists(self, one_based: bool = True) -> list[list[int]]:
        off = 1 if one_based else 0
        return [[i + off for i in range(self.n) if c >> i & 1] for c in self.clusters]

    def same_as(self, other: "Partition") -> bool:
        return self.n == other.n and self.clusters == other.clusters


def _check_f(f: SubsetTable) -> None:
    if f.n < 1:
        raise DomainError("need at least one item")
    if f.values[0] != -np.inf:
        raise DomainError("f(empty set) must be -inf: empty clusters are not allowed")


def _tables_for(n: int, tables: Optional[LogNumberTable]) -> LogNumberTable:
    if tables is None or tables.n_max < n:
        return build_tables(max(n, 1))
    return tables


def prior_on_k(n: int, prior: PriorSpec, tables: LogNumberTable) -> np.ndarray:
    """Marginal prior p(k), k = 1..n, normalized to sum to one."""
    logw = log_weights(n, prior, tables)
    counts = tables.stirling1 if prior.variant == DIRICHLET_PROCESS else tables.stirling2
    log_mass = np.array([logw[k] + log_factorial(k) + counts[n, k] for k in range(1, n + 1)])
    log_mass -= np.logaddexp.reduce(log_mass)
    return np.exp(log_mass)


def _normalize(log_u: np.ndarray) -> tuple[float, np.ndarray]:
    if not np.isfinite(log_u).any():
        raise EvidenceZeroError("every partition has zero posterior weight")
    log_z = float(np.logaddexp.reduce(log_u))
    return log_z, np.exp(log_u - log_z)


@dataclass
class _Sweep:
    """Accumulators filled while the convolution powers stream past."""

    n: int
    logw: np.ndarray
    want_pairs: bool
    aggregate: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.want_pairs:
            self.aggregate = np.full(1 << self.n, -np.inf)
            # k = 1 term: f^(0) is the convolution unit, nonzero only at U \ S = {}
            self.aggregate[-1] = self.logw[1]

    def __call__(self, k: int, table: SubsetTable) -> None:
        if not self.want_pairs or k + 1 > self.n:
            return
        # table.values[::-1][S] == f^(k)(U \ S)
        term = math.log(k + 1) + self.logw[k + 1] + table.values[::-1]
        np.logaddexp(self.aggregate, term, out=self.aggregate)


def _superset_sums(h: np.ndarray, n: int) -> np.ndarray:
    out = h.copy()
    for i in range(n):
        view = out.reshape(-1, 2, 1 << i)
        view[:, 0, :] += view[:, 1, :]
    return out


def _pairs_from_aggregate(f: SubsetTable, aggregate: np.ndarray, log_z: float) -> np.ndarray:
    n = f.n
    weight = np.exp(f.values + aggregate - log_z)
    sup = _superset_sums(weight, n)
    out = np.eye(n)
    for i in range(n):
        for j in range(i + 1, n):
            out[i, j] = out[j, i] = sup[(1 << i) | (1 << j)]
    return out


@dataclass(frozen=True, eq=False)
class ClusteringResult:
    summary: PosteriorSummary
    cooccurrence: Optional[CooccurrenceMatrix]
    modes: Optional[list]
    engine: dict = field(default_factory=dict)

    @property
    def global_mode(self) -> Optional[Partition]:
        if not self.modes:
            return None
        return max(self.modes, key=lambda kp: kp[1].log_posterior)[1]


def analyze(
    f: SubsetTable,
    prior: PriorSpec,
    tables: Optional[LogNumberTable] = None,
    *,
    outputs: Sequence[str] = OUTPUTS,
    engine: str = "direct",
    scale_bits: Optional[int] = DEFAULT_SCALE_BITS,
) -> ClusteringResult:
    """Run one convolution sweep and return every requested output."""
    _check_f(f)
    unknown = set(outputs) - set(OUTPUTS)
    if unknown:
        raise DomainError(f"unknown outputs {sorted(unknown)}; choose from {OUTPUTS}")
    n = f.n
    tables = _tables_for(n, tables)
    started = time.perf_counter()
    logw = log_weights(n, prior, tables)
    sweep = _Sweep(n, logw, "cooccurrence" in outputs)
    at_full = iterate_convolutions(f, n, sweep, engine=engine, scale_bits=scale_bits)
    log_u = logw[1:] + np.asarray(at_full)
    log_z, post = _normalize(log_u)
    summary = PosteriorSummary(n, log_z, post, prior_on_k(n, prior, tables))

    matrix = None
    if "cooccurrence" in outputs:
        matrix = CooccurrenceMatrix(n, _pairs_from_aggregate(f, sweep.aggregate, log_z))
    modes = None
    if "modes" in outputs:
        modes = _modes(f, logw, log_z)
    meta = {
        "variant": engine,
        "scale_bits": scale_bits if engine == "fast-exact" else None,
        "wall_time_s": time.perf_counter() - started,
    }
    return ClusteringResult(summary, matrix, modes, meta)


def posterior_k(
    f: SubsetTable, prior: PriorSpec, tables: Optional[LogNumberTable] = None, **kwargs
) -> PosteriorSummary:
    """Exact posterior over the number of clusters, with the log evidence."""
    return analyze(f, prior, tables, outputs=("posterior-k",), **kwargs).summary


def cooccurrence(
    f: SubsetTable, prior: PriorSpec, tables: Optional[LogNumberTable] = None, **kwargs
) -> CooccurrenceMatrix:
    """Exact posterior probability that each pair of items shares a cluster."""
    return analyze(f, prior, tables, outputs=("cooccurrence",), **kwargs).cooccurrence


def mode_partitions(
    f: SubsetTable,
    prior: PriorSpec,
    tables: Optional[LogNumberTable] = None,
    log_evidence: Optional[float] = None,
) -> list:
    """Best unordered k-partition for every feasible k, as ``(k, Partition)`` pairs."""
    _check_f(f)
    tables = _tables_for(f.n, tables)
    logw = log_weights(f.n, prior, tables)
    if log_evidence is None:
        log_evidence = posterior_k(f, prior, tables).log_evidence
    return _modes(f, logw, log_evidence)


def global_mode(modes: list) -> Partition:
    return max(modes, key=lambda kp: kp[1].log_posterior)[1]


def _modes(f: SubsetTable, logw: np.ndarray, log_z: float) -> list:
    n, full = f.n, f.full
    best = [None, f[full]]
    argmax = [None, None]
    current = f
    for k in range(2, n + 1):
        current, arg = max_convolve(f, current, record_argmax=True, min_size=k)
        best.append(current[full])
        argmax.append(arg)
    del current

    modes = []
    for k in range(1, n + 1):
        if best[k] == -np.inf:
            continue
        clusters = []
        rest = full
        for j in range(k, 1, -1):
            a = int(argmax[j][rest])
            clusters.append(a)
            rest ^= a
        clusters.append(rest)
        log_post = log_factorial(k) + logw[k] + best[k] - log_z
        modes.append((k, Partition(n, tuple(clusters), float(log_post))))
    return modes


def cooccurrence_by_pairs(
    f: SubsetTable, prior: PriorSpec, tables: Optional[LogNumberTable] = None
) -> CooccurrenceMatrix:
    """Pairwise probabilities by the literal per-pair, per-k double sum.

    Stores every convolution power, so it is only meant for small n where it
    serves as a cross-check of the streamed computation in :func:`analyze`.
    """
    _check_f(f)
    n, full = f.n, f.full
    tables = _tables_for(n, tables)
    logw = log_weights(n, prior, tables)
    powers = [SubsetTable.identity(n)]
    iterate_convolutions(f, n, lambda k, t: powers.append(t))
    log_z, _ = _normalize(logw[1:] + np.array([p[full] for p in powers[1:]]))
    masks = np.arange(1 << n)
    out = np.eye(n)
    for i in range(n):
        for j in range(i + 1, n):
            pair = (1 << i) | (1 << j)
            clusters = masks[(masks & pair) == pair]
            total = 0.0
            for k in range(1, n + 1):
                inner = np.logaddexp.reduce(f.values[clusters] + powers[k - 1].values[full ^ clusters])
                total += math.exp(math.log(k) + logw[k] + inner - log_z)
            out[i, j] = out[j, i] = total
    return CooccurrenceMatrix(n, out)
