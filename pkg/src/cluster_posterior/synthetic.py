"""Synthetic datasets drawn from the two conjugate models.

``normal-18``: three clusters of six items, two real features, cluster means
and precisions drawn from the gamma-normal prior (alpha=beta=tau=1, mu=0).
``binary-20``: twenty items in a uniformly random 5-partition, thirty 0/1
features with Beta(1, 1) cluster frequencies.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .likelihood import BINARY, CONTINUOUS, BetaBinomial, Dataset, GammaNormal

EXPERIMENTS = ("normal-18", "binary-20", "custom")


@dataclass(frozen=True)
class SyntheticSample:
    data: Dataset
    labels: np.ndarray  # generating cluster index per item, 0-based

    @property
    def clusters(self) -> list[list[int]]:
        """Generating partition as sorted 1-based index lists."""
        groups: dict[int, list[int]] = {}
        for item, lab in enumerate(self.labels):
            groups.setdefault(int(lab), []).append(item + 1)
        return sorted(groups.values())


def random_k_partition_labels(rng: np.random.Generator, n: int, k: int) -> np.ndarray:
    """Labels of a k-partition drawn uniformly from all unordered k-partitions."""
    if not 1 <= k <= n:
        raise DomainError(f"cannot split {n} items into {k} nonempty clusters")
    while True:
        labels = rng.integers(0, k, size=n)
        if np.unique(labels).size == k:
            break
    # relabel by first appearance
    order = {}
    for lab in labels:
        order.setdefault(int(lab), len(order))
    return np.array([order[int(lab)] for lab in labels])


def sample_normal(rng, labels, D, hyper: GammaNormal = GammaNormal()) -> np.ndarray:
    k = int(labels.max()) + 1
    precision = rng.gamma(shape=hyper.alpha, scale=1.0 / hyper.beta, size=(k, D))
    means = rng.normal(hyper.mu, 1.0 / np.sqrt(hyper.tau * precision))
    return rng.normal(means[labels], 1.0 / np.sqrt(precision[labels]))


def sample_binary(rng, labels, D, hyper: BetaBinomial = BetaBinomial()) -> np.ndarray:
    k = int(labels.max()) + 1
    freq = rng.beta(hyper.alpha, hyper.beta, size=(k, D))
    return (rng.random((labels.size, D)) < freq[labels]).astype(np.float64)


def generate(
    experiment: str,
    seed: int,
    *,
    n: int | None = None,
    k: int | None = None,
    D: int | None = None,
    kind: str = CONTINUOUS,
) -> SyntheticSample:
    rng = np.random.default_rng(seed)
    if experiment == "normal-18":
        labels = np.repeat(np.arange(3), 6)
        return SyntheticSample(Dataset(sample_normal(rng, labels, 2), CONTINUOUS), labels)
    if experiment == "binary-20":
        labels = random_k_partition_labels(rng, 20, 5)
        return SyntheticSample(Dataset(sample_binary(rng, labels, 30), BINARY), labels)
    if experiment == "custom":
        if n is None or k is None or D is None:
            raise DomainError("custom experiments need n, k and D")
        if D < 1:
            raise DomainError("D must be at least 1")
        labels = random_k_partition_labels(rng, n, k)
        if kind == BINARY:
            return SyntheticSample(Dataset(sample_binary(rng, labels, D), BINARY), labels)
        if kind == CONTINUOUS:
            return SyntheticSample(Dataset(sample_normal(rng, labels, D), CONTINUOUS), labels)
        raise DomainError(f"unknown data kind {kind!r}")
    raise DomainError(f"unknown experiment {experiment!r}; choose from {EXPERIMENTS}")
