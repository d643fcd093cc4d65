"""Partition priors as (per-cluster factor, cardinality weight) pairs.

An ordered k-partition ``(S_1, ..., S_k)`` receives prior mass
``w_k * prod_j f_prior(S_j)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .combinatorics import LogNumberTable, build_tables, log_factorial
from .errors import DomainError

UNIFORM_K = "uniform-k"
UNIFORM_PARTITIONS = "uniform-partitions"
DIRICHLET_PROCESS = "dp"
VARIANTS = (UNIFORM_K, UNIFORM_PARTITIONS, DIRICHLET_PROCESS)


@dataclass(frozen=True)
class PriorSpec:
    """Which partition prior to use.

    With ``strict_paper=True`` the Dirichlet-process weight omits the
    ``theta**k`` factor; the two forms coincide at ``theta == 1``.
    """

    variant: str = UNIFORM_K
    theta: float = 1.0
    strict_paper: bool = False

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise DomainError(f"unknown prior {self.variant!r}; choose from {VARIANTS}")
        if self.variant == DIRICHLET_PROCESS and not self.theta > 0:
            raise DomainError(f"Dirichlet-process theta must be positive, got {self.theta}")

    def describe(self) -> dict:
        out = {"variant": self.variant}
        if self.variant == DIRICHLET_PROCESS:
            out["theta"] = self.theta
            out["strict_paper"] = self.strict_paper
        return out


def log_f_prior(cluster_size: int, prior: PriorSpec) -> float:
    if cluster_size < 1:
        raise DomainError("clusters must be nonempty")
    if prior.variant == DIRICHLET_PROCESS:
        return math.lgamma(cluster_size)
    return 0.0


def log_f_prior_by_size(n: int, prior: PriorSpec) -> np.ndarray:
    """``log f_prior`` for sizes 0..n, with -inf at size 0."""
    out = np.full(n + 1, -np.inf)
    for c in range(1, n + 1):
        out[c] = log_f_prior(c, prior)
    return out


def log_weight(k: int, n: int, prior: PriorSpec, tables: LogNumberTable | None = None) -> float:
    """log w_k for a ground set of n items."""
    if not 1 <= k <= n:
        raise DomainError(f"k={k} outside 1..{n}")
    if prior.variant == UNIFORM_PARTITIONS:
        tables = tables or build_tables(n)
        return -log_factorial(k) - tables.log_bell(n)
    if prior.variant == UNIFORM_K:
        tables = tables or build_tables(n)
        return -log_factorial(k) - math.log(n) - tables.log_stirling2(n, k)
    theta = prior.theta
    base = math.lgamma(theta) - math.lgamma(theta + n) - log_factorial(k)
    if prior.strict_paper:
        return base
    return base + k * math.log(theta)


def log_weights(n: int, prior: PriorSpec, tables: LogNumberTable | None = None) -> np.ndarray:
    """Array of log w_k indexed by k = 0..n (entry 0 is -inf)."""
    if n >= 1 and tables is None and prior.variant != DIRICHLET_PROCESS:
        tables = build_tables(n)
    out = np.full(n + 1, -np.inf)
    for k in range(1, n + 1):
        out[k] = log_weight(k, n, prior, tables)
    return out
