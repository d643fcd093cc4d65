"""Log-domain Stirling and Bell numbers, plus log-gamma."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError

N_MAX_LIMIT = 64


def log_gamma(x: float) -> float:
    """Natural log of the gamma function for positive x."""
    if not x > 0:
        raise DomainError(f"log_gamma requires x > 0, got {x}")
    return math.lgamma(x)


def log_factorial(k: int) -> float:
    return math.lgamma(k + 1)


@dataclass(frozen=True, eq=False)
class LogNumberTable:
    """Triangular tables of log S(n,k), log c(n,k) and log B_n for n <= n_max.

    ``stirling2[n, k]`` and ``stirling1[n, k]`` are -inf outside ``0 <= k <= n``
    (and at k=0 for n>0).
    """

    n_max: int
    stirling2: np.ndarray
    stirling1: np.ndarray
    bell: np.ndarray

    def log_stirling2(self, n: int, k: int) -> float:
        self._check(n)
        return float(self.stirling2[n, k]) if 0 <= k <= n else -math.inf

    def log_stirling1(self, n: int, k: int) -> float:
        self._check(n)
        return float(self.stirling1[n, k]) if 0 <= k <= n else -math.inf

    def log_bell(self, n: int) -> float:
        self._check(n)
        return float(self.bell[n])

    def _check(self, n: int) -> None:
        if not 0 <= n <= self.n_max:
            raise DomainError(f"n={n} outside table range 0..{self.n_max}")


def build_tables(n_max: int) -> LogNumberTable:
    """Fill the tables by the standard recurrences in log space.

    S(n,k) = k S(n-1,k) + S(n-1,k-1) and c(n,k) = (n-1) c(n-1,k) + c(n-1,k-1).
    The row sums are checked against B_n and n! before returning.
    """
    if not 1 <= n_max <= N_MAX_LIMIT:
        raise DomainError(f"n_max={n_max} outside 1..{N_MAX_LIMIT}")
    s2 = np.full((n_max + 1, n_max + 1), -np.inf)
    s1 = np.full((n_max + 1, n_max + 1), -np.inf)
    s2[0, 0] = s1[0, 0] = 0.0
    with np.errstate(divide="ignore"):
        for n in range(1, n_max + 1):
            for k in range(1, n + 1):
                s2[n, k] = np.logaddexp(math.log(k) + s2[n - 1, k], s2[n - 1, k - 1])
                grow = math.log(n - 1) + s1[n - 1, k] if n > 1 else -np.inf
                s1[n, k] = np.logaddexp(grow, s1[n - 1, k - 1])
    bell = np.array([np.logaddexp.reduce(s2[n, : n + 1]) for n in range(n_max + 1)])

    for n in range(1, n_max + 1):
        total = np.logaddexp.reduce(s1[n, : n + 1])
        if abs(math.expm1(total - log_factorial(n))) > 1e-10:
            raise ArithmeticError(f"Stirling first-kind row {n} does not sum to n!")
        if abs(s2[n, 1]) > 1e-12 or abs(s2[n, n]) > 1e-12:
            raise ArithmeticError(f"S({n},1) or S({n},{n}) differs from 1")
    for arr in (s2, s1, bell):
        arr.flags.writeable = False
    return LogNumberTable(n_max, s2, s1, bell)
