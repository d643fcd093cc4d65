"""Conjugate cluster marginal likelihoods and the subset table ``f``.

Two families are supported, each with all cluster parameters integrated out:

- beta-binomial for 0/1 features, sufficient statistics ``(c, s)``;
- gamma-normal for real features, sufficient statistics ``(c, s, q)``.

Features are independent given the partition, so a cluster's log marginal
likelihood is the sum over features.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .errors import DataError, DomainError
from .priors import PriorSpec, log_f_prior_by_size
from .subsets import MAX_N, SubsetTable, popcounts

BINARY = "binary"
CONTINUOUS = "continuous"

LOG_2PI = math.log(2.0 * math.pi)


@dataclass(frozen=True, eq=False)
class Dataset:
    """An ``n x D`` data matrix; rows are items, columns are features."""

    values: np.ndarray
    kind: str = CONTINUOUS
    feature_names: tuple = field(default=())

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64, copy=True)
        if values.ndim == 1:
            values = values[:, None]
        if values.ndim != 2:
            raise DataError(f"data must be a 2-D matrix, got shape {values.shape}")
        if not np.isfinite(values).all():
            raise DataError("data contains missing or non-finite values")
        if self.kind not in (BINARY, CONTINUOUS):
            raise DataError(f"unknown data kind {self.kind!r}")
        if self.kind == BINARY and not np.isin(values, (0.0, 1.0)).all():
            raise DataError("binary data may only contain 0 and 1")
        values.flags.writeable = False
        object.__setattr__(self, "values", values)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def D(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class BetaBinomial:
    alpha: float = 1.0
    beta: float = 1.0
    kind = BINARY
    name = "binary"

    def __post_init__(self):
        if not (self.alpha > 0 and self.beta > 0):
            raise DomainError("beta-binomial hyperparameters must be positive")

    def describe(self) -> dict:
        return {"family": "beta-binomial", "alpha": self.alpha, "beta": self.beta}


@dataclass(frozen=True)
class GammaNormal:
    alpha: float = 1.0
    beta: float = 1.0
    mu: float = 0.0
    tau: float = 1.0
    kind = CONTINUOUS
    name = "normal"

    def __post_init__(self):
        if not (self.alpha > 0 and self.beta > 0 and self.tau > 0):
            raise DomainError("gamma-normal alpha, beta and tau must be positive")
        if not math.isfinite(self.mu):
            raise DomainError("gamma-normal mu must be finite")

    def describe(self) -> dict:
        return {
            "family": "gamma-normal",
            "alpha": self.alpha,
            "beta": self.beta,
            "mu": self.mu,
            "tau": self.tau,
        }


ModelSpec = Union[BetaBinomial, GammaNormal]


@dataclass(frozen=True)
class ClusterStats:
    """Per-feature sufficient statistics of one cluster."""

    c: int
    s: np.ndarray
    q: np.ndarray

    @classmethod
    def empty(cls, D: int) -> "ClusterStats":
        return cls(0, np.zeros(D), np.zeros(D))

    @classmethod
    def of(cls, data: Dataset, mask: int) -> "ClusterStats":
        rows = data.values[[i for i in range(data.n) if mask >> i & 1]]
        return cls(rows.shape[0], rows.sum(axis=0), (rows**2).sum(axis=0))

    def __add__(self, other: "ClusterStats") -> "ClusterStats":
        return ClusterStats(self.c + other.c, self.s + other.s, self.q + other.q)


def beta_binomial_log_ml(c: int, s: int, h: BetaBinomial) -> float:
    """log p(data) for one feature of a cluster with c items and s ones."""
    if not 0 <= s <= c:
        raise DomainError(f"need 0 <= s <= c, got c={c}, s={s}")
    a, b = h.alpha, h.beta
    return (
        math.lgamma(a + s)
        + math.lgamma(b + c - s)
        + math.lgamma(a + b)
        - math.lgamma(a + b + c)
        - math.lgamma(a)
        - math.lgamma(b)
    )


def _gamma_normal_from_moments(c, mean, m2, h: GammaNormal):
    """Vectorized log marginal likelihood from (count, mean, centered sum of squares)."""
    c = np.asarray(c, dtype=np.float64)
    tau_c = h.tau + c
    alpha_c = h.alpha + c / 2.0
    beta_c = h.beta + np.maximum(m2, 0.0) / 2.0 + h.tau * c * (mean - h.mu) ** 2 / (2.0 * tau_c)
    lg = np.vectorize(math.lgamma, otypes=[np.float64])
    return (
        lg(alpha_c)
        - math.lgamma(h.alpha)
        + h.alpha * math.log(h.beta)
        - alpha_c * np.log(beta_c)
        + 0.5 * (math.log(h.tau) - np.log(tau_c))
        - 0.5 * c * LOG_2PI
    )


def gamma_normal_log_ml(c: int, s: float, q: float, h: GammaNormal) -> float:
    """log p(data) for one feature of a cluster with count c, sum s, sum of squares q."""
    if c < 0:
        raise DomainError("cluster size must be nonnegative")
    if c == 0:
        return 0.0
    m2 = q - s * s / c
    if m2 < -1e-9 * max(1.0, abs(q)):
        raise DomainError(f"inconsistent statistics: q={q} < s^2/c={s * s / c}")
    beta_c = h.beta + max(m2, 0.0) / 2.0 + h.tau * (s - c * h.mu) ** 2 / (2.0 * c * (h.tau + c))
    if beta_c <= 0:
        raise ArithmeticError("posterior rate beta_c must be positive")
    alpha_c = h.alpha + c / 2.0
    return (
        math.lgamma(alpha_c)
        - math.lgamma(h.alpha)
        + h.alpha * math.log(h.beta)
        - alpha_c * math.log(beta_c)
        + 0.5 * (math.log(h.tau) - math.log(h.tau + c))
        - 0.5 * c * LOG_2PI
    )


def _check_model(data: Dataset, model: ModelSpec) -> None:
    if data.kind != model.kind:
        raise DataError(f"{model.name} model needs {model.kind} data, got {data.kind}")
    if data.n > MAX_N:
        raise DataError(f"n={data.n} items exceeds the cap of {MAX_N}")
    if data.n < 1:
        raise DataError("dataset has no items")


def _subset_sums(column: np.ndarray, n: int, dtype) -> np.ndarray:
    out = np.zeros(1 << n, dtype=dtype)
    for i in range(n):
        lo = 1 << i
        out[lo : 2 * lo] = out[:lo] + column[i]
    return out


def _subset_moments(column: np.ndarray, n: int):
    """Running mean and centered sum of squares for every subset (Welford updates)."""
    mean = np.zeros(1 << n)
    m2 = np.zeros(1 << n)
    pop = popcounts(n)
    for i in range(n):
        lo = 1 << i
        count = pop[:lo].astype(np.float64) + 1.0
        delta = column[i] - mean[:lo]
        new_mean = mean[:lo] + delta / count
        mean[lo : 2 * lo] = new_mean
        m2[lo : 2 * lo] = m2[:lo] + delta * (column[i] - new_mean)
    return mean, m2


def log_likelihood_table(data: Dataset, model: ModelSpec) -> np.ndarray:
    """Sum over features of the log marginal likelihood, for every subset.

    Statistics for ``X`` are built from ``X`` minus its top item, so the whole
    table costs O(D 2^n). The empty set gets 0 here.
    """
    _check_model(data, model)
    n = data.n
    pop = popcounts(n)
    total = np.zeros(1 << n)
    if isinstance(model, BetaBinomial):
        lookup = np.zeros((n + 1, n + 1))
        for c in range(n + 1):
            for s in range(c + 1):
                lookup[c, s] = beta_binomial_log_ml(c, s, model)
        for d in range(data.D):
            ones = _subset_sums(data.values[:, d].astype(np.int8), n, np.int8)
            total += lookup[pop, ones]
    else:
        for d in range(data.D):
            mean, m2 = _subset_moments(data.values[:, d], n)
            part = _gamma_normal_from_moments(pop, mean, m2, model)
            part[0] = 0.0
            total += part
    return total


def build_f_table(data: Dataset, model: ModelSpec, prior: PriorSpec) -> SubsetTable:
    """``f(X) = log f_prior(X) + log f_lik(X)`` for every subset, -inf at the empty set."""
    values = log_likelihood_table(data, model)
    values += log_f_prior_by_size(data.n, prior)[popcounts(data.n)]
    return SubsetTable(data.n, values)


def prior_only_table(n: int, prior: PriorSpec) -> SubsetTable:
    """The f table of a flat likelihood (every cluster has likelihood 1)."""
    return SubsetTable(n, log_f_prior_by_size(n, prior)[popcounts(n)])
