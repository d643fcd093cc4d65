"""Brute-force reference: enumerate every unordered partition and sum directly.

Partitions are generated as restricted growth strings ``a`` with ``a[0] = 0``
and ``a[i+1] <= 1 + max(a[:i+1])``, in lexicographic order. This module does
not use any subset convolution, and on the data path it recomputes each
cluster's marginal likelihood from the raw rows.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Iterator, Union

import numpy as np

from .combinatorics import build_tables, log_factorial
from .errors import EnumerationLimitError, EvidenceZeroError
from .likelihood import (
    BetaBinomial,
    ClusterStats,
    Dataset,
    ModelSpec,
    beta_binomial_log_ml,
    gamma_normal_log_ml,
)
from .posterior import (
    ClusteringResult,
    CooccurrenceMatrix,
    Partition,
    PosteriorSummary,
    prior_on_k,
)
from .priors import PriorSpec, log_f_prior, log_weights
from .subsets import SubsetTable

MAX_ORACLE_N = 13


def growth_strings(n: int) -> Iterator[tuple]:
    """Yield all restricted growth strings of length n in lexicographic order."""
    if n < 1:
        return
    a = [0] * n

    def extend(i: int, top: int):
        if i == n:
            yield tuple(a)
            return
        for v in range(top + 2):
            a[i] = v
            yield from extend(i + 1, max(top, v))

    yield from extend(1, 0)


def enumerate_partitions(n: int, visitor: Callable[[tuple], None]) -> int:
    """Call ``visitor(growth_string)`` once per unordered partition of n items.

    Returns the number of partitions visited (the Bell number B_n).
    """
    if not 1 <= n <= MAX_ORACLE_N:
        raise EnumerationLimitError(
            f"enumeration supports 1 <= n <= {MAX_ORACLE_N}; "
            f"n={n} has B_n partitions, beyond the brute-force time budget"
        )
    count = 0
    for rgs in growth_strings(n):
        visitor(rgs)
        count += 1
    return count


def cluster_masks(rgs: tuple) -> tuple:
    masks = [0] * (max(rgs) + 1)
    for i, lab in enumerate(rgs):
        masks[lab] |= 1 << i
    return tuple(masks)


# Exact integer counts, independent of the log-domain tables.


@lru_cache(maxsize=None)
def stirling2_exact(n: int, k: int) -> int:
    if n == k:
        return 1
    if k == 0 or k > n:
        return 0
    return k * stirling2_exact(n - 1, k) + stirling2_exact(n - 1, k - 1)


@lru_cache(maxsize=None)
def stirling1_exact(n: int, k: int) -> int:
    """Unsigned Stirling number of the first kind."""
    if n == k:
        return 1
    if k == 0 or k > n:
        return 0
    return (n - 1) * stirling1_exact(n - 1, k) + stirling1_exact(n - 1, k - 1)


def bell_exact(n: int) -> int:
    return sum(stirling2_exact(n, k) for k in range(n + 1))


@dataclass(frozen=True, eq=False)
class OracleResult:
    summary: PosteriorSummary
    cooccurrence: CooccurrenceMatrix
    mode: Partition
    modes_by_k: dict
    count: int
    cluster_log_f: dict
    log_w: np.ndarray

    def log_posterior_of(self, partition: Partition) -> float:
        """Log posterior of any given partition under the enumerated model."""
        k = partition.k
        total = log_factorial(k) + self.log_w[k] - self.summary.log_evidence
        return total + sum(self.cluster_log_f[c] for c in partition.clusters)


def data_log_f(data: Dataset, model: ModelSpec, prior: PriorSpec) -> Callable[[int], float]:
    """Per-cluster ``log f`` computed from scratch for each mask."""

    def log_f(mask: int) -> float:
        stats = ClusterStats.of(data, mask)
        total = log_f_prior(stats.c, prior)
        for d in range(data.D):
            if isinstance(model, BetaBinomial):
                total += beta_binomial_log_ml(stats.c, int(round(stats.s[d])), model)
            else:
                total += gamma_normal_log_ml(stats.c, stats.s[d], stats.q[d], model)
        return total

    return log_f


def brute_force(
    log_f: Union[SubsetTable, Callable[[int], float]], n: int, prior: PriorSpec
) -> OracleResult:
    """Exhaustive posterior over partitions for an arbitrary cluster function."""
    if isinstance(log_f, SubsetTable):
        table = log_f
        log_f = lambda mask: float(table.values[mask])  # noqa: E731
    cache: dict[int, float] = {}
    tables = build_tables(n)
    logw = log_weights(n, prior, tables)
    weights, parts = [], []

    def visit(rgs):
        masks = cluster_masks(rgs)
        k = len(masks)
        total = log_factorial(k) + logw[k]
        for m in masks:
            if m not in cache:
                cache[m] = log_f(m)
            total += cache[m]
        weights.append(total)
        parts.append(masks)

    count = enumerate_partitions(n, visit)
    weights = np.array(weights)
    if not np.isfinite(weights).any():
        raise EvidenceZeroError("every partition has zero posterior weight")
    log_z = float(np.logaddexp.reduce(weights))
    probs = np.exp(weights - log_z)

    post_k = np.zeros(n)
    cluster_mass: dict[int, float] = {}
    best_by_k: dict[int, int] = {}
    for idx, (p, masks) in enumerate(zip(probs, parts)):
        k = len(masks)
        post_k[k - 1] += p
        for m in masks:
            cluster_mass[m] = cluster_mass.get(m, 0.0) + p
        if k not in best_by_k or weights[idx] > weights[best_by_k[k]]:
            best_by_k[k] = idx

    pairs = np.eye(n)
    for m, p in cluster_mass.items():
        members = [i for i in range(n) if m >> i & 1]
        for a, i in enumerate(members):
            for j in members[a + 1 :]:
                pairs[i, j] += p
                pairs[j, i] += p

    modes_by_k = {
        k: Partition(n, parts[idx], float(weights[idx] - log_z))
        for k, idx in sorted(best_by_k.items())
        if np.isfinite(weights[idx])
    }
    mode = max(modes_by_k.values(), key=lambda part: part.log_posterior)
    summary = PosteriorSummary(n, log_z, post_k, prior_on_k(n, prior, tables))
    return OracleResult(summary, CooccurrenceMatrix(n, pairs), mode, modes_by_k, count, cache, logw)


def brute_posteriors(data: Dataset, model: ModelSpec, prior: PriorSpec) -> OracleResult:
    """Exhaustive posteriors for a dataset, recomputing each cluster's likelihood."""
    if data.n > MAX_ORACLE_N:
        raise EnumerationLimitError(f"oracle supports at most {MAX_ORACLE_N} items, got {data.n}")
    return brute_force(data_log_f(data, model, prior), data.n, prior)


def compare(result: ClusteringResult, oracle: OracleResult, tol: float = 1e-9) -> list[str]:
    """Describe every quantity where the engine and the oracle differ beyond tol.

    The global mode may legitimately differ when several partitions tie, so a
    different partition is accepted if the oracle scores it as optimal too.
    """
    problems = []

    def check(name, mine, ref):
        diff = float(np.max(np.abs(np.asarray(mine) - np.asarray(ref))))
        if not diff <= tol:
            problems.append(f"{name}: max abs difference {diff:.3g} exceeds {tol:g}")

    check("posterior_k", result.summary.posterior_k, oracle.summary.posterior_k)
    check("log_evidence", result.summary.log_evidence, oracle.summary.log_evidence)
    if result.cooccurrence is not None:
        check("cooccurrence", result.cooccurrence.entries, oracle.cooccurrence.entries)
    if result.modes is not None:
        for k, part in result.modes:
            ref = oracle.modes_by_k.get(k)
            if ref is None:
                problems.append(f"mode k={k}: oracle found no feasible partition")
                continue
            check(f"mode k={k} log posterior", part.log_posterior, ref.log_posterior)
            check(f"mode k={k} partition score", oracle.log_posterior_of(part), ref.log_posterior)
        best = result.global_mode
        check("global mode log posterior", best.log_posterior, oracle.mode.log_posterior)
        check("global mode partition score", oracle.log_posterior_of(best), oracle.mode.log_posterior)
    return problems
