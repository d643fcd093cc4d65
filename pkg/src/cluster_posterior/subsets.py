"""Subset tables over a bitmask-indexed ground set and their convolutions.

A :class:`SubsetTable` stores one log-domain value per subset of the item set
``U = {0, ..., n-1}``; subset ``X`` lives at index ``X`` read as a bitmask.
Three convolution engines are provided:

- :func:`direct_convolve`: sum-product over all submask splits, Θ(3^n).
- :func:`fast_convolve_exact`: ranked zeta/Möbius algorithm, O(n^2 2^n)
  arithmetic on arbitrary-precision integers, so no cancellation error.
- :func:`max_convolve`: the max-product variant with optional argmax tables,
  used to recover optimal partitions.

Every kernel enumerates submasks in ascending integer order and accumulates
each output entry sequentially, so results do not depend on thread count.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Optional

import numba
import numpy as np

from .errors import DimensionError, DomainError, PrecisionError

if "NUMBA_THREADING_LAYER" not in os.environ:
    # TBB builds in common wheels are often too old and warn on every import
    numba.config.THREADING_LAYER = "workqueue"

MAX_N = 26
DEFAULT_SCALE_BITS = 96
# Significand bits every finite entry must keep after fixed-point conversion.
GUARD_BITS = 53

NEG_INF = -np.inf


@lru_cache(maxsize=None)
def popcounts(n: int) -> np.ndarray:
    """Read-only array holding ``|X|`` for every mask ``X`` of an n-set."""
    counts = np.zeros(1, dtype=np.int8)
    for _ in range(n):
        counts = np.concatenate([counts, counts + 1])
    counts.flags.writeable = False
    return counts


def _check_n(n: int) -> None:
    if not 0 <= n <= MAX_N:
        raise DomainError(f"ground-set size n={n} outside supported range 0..{MAX_N}")


@dataclass(frozen=True, eq=False)
class SubsetTable:
    """Log-domain values for all ``2**n`` subsets, indexed by bitmask.

    ``-inf`` encodes an exact zero. The backing array is read-only.
    """

    n: int
    values: np.ndarray

    def __post_init__(self):
        _check_n(self.n)
        values = np.array(self.values, dtype=np.float64, copy=True)
        if values.shape != (1 << self.n,):
            raise DimensionError(
                f"table for n={self.n} needs {1 << self.n} entries, got shape {values.shape}"
            )
        if np.isnan(values).any():
            raise DomainError("subset table contains NaN")
        values.flags.writeable = False
        object.__setattr__(self, "values", values)

    @classmethod
    def from_values(cls, values) -> "SubsetTable":
        values = np.asarray(values, dtype=np.float64)
        n = int(values.shape[0]).bit_length() - 1
        return cls(n, values)

    @classmethod
    def from_linear(cls, values) -> "SubsetTable":
        """Build a table from nonnegative linear-domain values."""
        values = np.asarray(values, dtype=np.float64)
        if (values < 0).any():
            raise DomainError("linear-domain values must be nonnegative")
        with np.errstate(divide="ignore"):
            return cls.from_values(np.log(values))

    @classmethod
    def identity(cls, n: int) -> "SubsetTable":
        """The convolution unit: log 1 at the empty set, -inf elsewhere."""
        values = np.full(1 << n, NEG_INF)
        values[0] = 0.0
        return cls(n, values)

    @property
    def full(self) -> int:
        return (1 << self.n) - 1

    def __len__(self) -> int:
        return self.values.shape[0]

    def __getitem__(self, mask: int) -> float:
        return float(self.values[mask])

    def shifted_by_size(self, t: float) -> "SubsetTable":
        """Return the table ``X -> value(X) + t*|X|``."""
        return SubsetTable(self.n, self.values + t * popcounts(self.n))


def _check_pair(f: SubsetTable, g: SubsetTable) -> None:
    if f.n != g.n:
        raise DimensionError(f"tables over different ground sets: n={f.n} vs n={g.n}")


# ---------------------------------------------------------------------------
# Direct (sum-product) and max-product kernels
# ---------------------------------------------------------------------------


@numba.njit(parallel=True, cache=True)
def _direct_kernel(f, g, pop, min_size, out):
    size = f.shape[0]
    for x in numba.prange(size):
        if pop[x] < min_size:
            out[x] = -np.inf
            continue
        m = -np.inf
        s = 0.0
        a = 0
        while True:
            fa = f[a]
            if fa != -np.inf:
                gb = g[x ^ a]
                if gb != -np.inf:
                    v = fa + gb
                    if v <= m:
                        s += math.exp(v - m)
                    else:
                        s = s * math.exp(m - v) + 1.0
                        m = v
            if a == x:
                break
            a = (a - x) & x
        if m == -np.inf:
            out[x] = -np.inf
        else:
            out[x] = m + math.log(s)


@numba.njit(parallel=True, cache=True)
def _max_kernel(f, g, pop, min_size, out, arg):
    size = f.shape[0]
    for x in numba.prange(size):
        if pop[x] < min_size:
            out[x] = -np.inf
            arg[x] = -1
            continue
        best = -np.inf
        best_a = -1
        a = 0
        while True:
            fa = f[a]
            if fa != -np.inf:
                gb = g[x ^ a]
                if gb != -np.inf:
                    v = fa + gb
                    if v > best:
                        best = v
                        best_a = a
            if a == x:
                break
            a = (a - x) & x
        out[x] = best
        arg[x] = best_a


def direct_convolve(f: SubsetTable, g: SubsetTable, *, min_size: int = 0) -> SubsetTable:
    """Sum-product subset convolution in the log domain.

    ``result(X) = log sum_{A <= X} exp(f(A) + g(X \\ A))``. Entries with
    ``|X| < min_size`` are set to -inf without evaluation; callers use this
    only where those entries are provably zero.
    """
    _check_pair(f, g)
    out = np.empty(1 << f.n)
    _direct_kernel(f.values, g.values, popcounts(f.n), min_size, out)
    return SubsetTable(f.n, out)


def max_convolve(
    f: SubsetTable, g: SubsetTable, record_argmax: bool = True, *, min_size: int = 0
):
    """Max-product subset convolution.

    Returns ``(table, argmax)`` where ``table(X) = max_A f(A) + g(X \\ A)`` and
    ``argmax[X]`` is the maximizing submask ``A`` (the smallest mask on ties,
    -1 where every split is -inf). ``argmax`` is None unless requested.
    ``min_size`` has the same meaning as in :func:`direct_convolve`.
    """
    _check_pair(f, g)
    out = np.empty(1 << f.n)
    arg = np.empty(1 << f.n, dtype=np.int32 if f.n < 31 else np.int64)
    _max_kernel(f.values, g.values, popcounts(f.n), min_size, out, arg)
    return SubsetTable(f.n, out), (arg if record_argmax else None)


def iterate_convolutions(
    f: SubsetTable,
    k_max: int,
    consumer: Optional[Callable[[int, SubsetTable], None]] = None,
    *,
    engine: str = "direct",
    scale_bits: Optional[int] = DEFAULT_SCALE_BITS,
) -> list[float]:
    """Compute ``f^(k)(U)`` for ``k = 1..k_max`` by repeated convolution with f.

    ``consumer(k, table)`` is called with each full ``f^(k)`` table as soon as
    it exists; at most two tables are alive at any time.
    """
    if not 1 <= k_max <= max(f.n, 1):
        raise DomainError(f"k_max={k_max} outside 1..{f.n}")
    if engine not in ("direct", "fast-exact"):
        raise DomainError(f"unknown convolution engine {engine!r}")
    current = f
    results = [current[current.full]]
    if consumer is not None:
        consumer(1, current)
    for k in range(2, k_max + 1):
        if engine == "direct":
            current = direct_convolve(f, current, min_size=k)
        else:
            current = fast_convolve_exact(f, current, scale_bits)
        results.append(current[current.full])
        if consumer is not None:
            consumer(k, current)
    return results


# ---------------------------------------------------------------------------
# Exact fast subset convolution
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class FixedPointTable:
    """Linear-domain table of integers ``round(exp(value - shift) * 2**scale_bits)``.

    ``entries`` is an object array of Python ints (arbitrary precision).
    """

    n: int
    scale_bits: int
    shift: float
    entries: np.ndarray

    @classmethod
    def from_table(
        cls, table: SubsetTable, scale_bits: int = DEFAULT_SCALE_BITS, shift: Optional[float] = None
    ) -> "FixedPointTable":
        values = table.values
        finite = np.isfinite(values)
        if shift is None:
            shift = float(values[finite].max()) if finite.any() else 0.0
        entries = np.zeros(values.shape[0], dtype=object)
        for x in np.flatnonzero(finite):
            mant, exp = math.frexp(math.exp(values[x] - shift))
            # 53-bit integer significand, then an exact power-of-two shift
            sig = int(mant * (1 << 53))
            e = exp - 53 + scale_bits
            if e >= 0:
                entries[x] = sig << e
            else:
                entries[x] = (sig + (1 << (-e - 1))) >> -e
        return cls(table.n, scale_bits, shift, entries)

    @classmethod
    def from_ints(cls, values, scale_bits: int = 0, shift: float = 0.0) -> "FixedPointTable":
        entries = np.empty(len(values), dtype=object)
        entries[:] = [int(v) for v in values]
        n = len(values).bit_length() - 1
        if len(values) != 1 << n:
            raise DimensionError(f"length {len(values)} is not a power of two")
        return cls(n, scale_bits, shift, entries)

    def to_table(self) -> SubsetTable:
        offset = self.shift - self.scale_bits * math.log(2.0)
        out = np.full(self.entries.shape[0], NEG_INF)
        for x, v in enumerate(self.entries):
            if v > 0:
                out[x] = math.log(v) + offset
            elif v < 0:
                raise DomainError(f"negative fixed-point entry at mask {x}")
        return SubsetTable(self.n, out)


def _zeta_inplace(arr: np.ndarray, n: int, sign: int = 1) -> None:
    """Subset-sum (sign=+1) or Möbius (sign=-1) transform along the last axis."""
    lead = arr.shape[:-1]
    for i in range(n):
        view = arr.reshape(lead + (-1, 2, 1 << i))
        if sign > 0:
            view[..., 1, :] += view[..., 0, :]
        else:
            view[..., 1, :] -= view[..., 0, :]


def zeta_transform(z: FixedPointTable) -> FixedPointTable:
    """``ẑ(X) = sum_{A <= X} z(A)`` with exact integer arithmetic."""
    entries = z.entries.copy()
    _zeta_inplace(entries, z.n, +1)
    return FixedPointTable(z.n, z.scale_bits, z.shift, entries)


def mobius_transform(z: FixedPointTable) -> FixedPointTable:
    """Inverse of :func:`zeta_transform`."""
    entries = z.entries.copy()
    _zeta_inplace(entries, z.n, -1)
    return FixedPointTable(z.n, z.scale_bits, z.shift, entries)


def _ranked(entries: np.ndarray, n: int) -> np.ndarray:
    pop = popcounts(n)
    ranked = np.zeros((n + 1, entries.shape[0]), dtype=entries.dtype)
    for r in range(n + 1):
        sel = pop == r
        ranked[r, sel] = entries[sel]
    return ranked


def _rank_convolve(fr: np.ndarray, gr: np.ndarray, n: int, zero) -> np.ndarray:
    """Combine zeta-transformed rank tables and read off rank |X| at each X."""
    pop = popcounts(n)
    out = np.empty(fr.shape[1], dtype=fr.dtype)
    for j in range(n + 1):
        h = np.full(fr.shape[1], zero, dtype=fr.dtype)
        for r in range(j + 1):
            h += fr[r] * gr[j - r]
        _zeta_inplace(h, n, -1)
        sel = pop == j
        out[sel] = h[sel]
    return out


def size_rescale_constant(f: SubsetTable) -> float:
    """Largest singleton value of f (0 if every singleton is -inf)."""
    singles = f.values[[1 << i for i in range(f.n)]] if f.n else np.array([])
    singles = singles[np.isfinite(singles)]
    return float(singles.max()) if singles.size else 0.0


def _required_bits(table: SubsetTable, shift: float) -> int:
    finite = table.values[np.isfinite(table.values)]
    if finite.size == 0:
        return GUARD_BITS
    span = shift - float(finite.min())
    return GUARD_BITS + max(0, math.ceil(span / math.log(2.0)))


def fast_convolve_exact(
    f: SubsetTable, g: SubsetTable, scale_bits: Optional[int] = DEFAULT_SCALE_BITS
) -> SubsetTable:
    """Ranked fast subset convolution on exact fixed-point integers.

    Both inputs are first rescaled by ``exp(-c*|X|)`` with c the largest
    singleton value of f; the factor is restored on output. The only error
    relative to :func:`direct_convolve` comes from quantizing the inputs.
    Raises :class:`PrecisionError` when ``scale_bits`` would leave some finite
    entry with fewer than ``GUARD_BITS`` significant bits; ``scale_bits=None``
    picks the smallest sufficient scale instead.
    """
    _check_pair(f, g)
    if scale_bits is not None and scale_bits < 1:
        raise DomainError("scale_bits must be at least 1")
    n = f.n
    pop = popcounts(n)
    c = size_rescale_constant(f)
    fs = f.shifted_by_size(-c)
    gs = g.shifted_by_size(-c)
    shifts = []
    for t in (fs, gs):
        finite = t.values[np.isfinite(t.values)]
        if finite.size == 0:
            return SubsetTable(n, np.full(1 << n, NEG_INF))
        shifts.append(float(finite.max()))
    required = max(_required_bits(fs, shifts[0]), _required_bits(gs, shifts[1]))
    if scale_bits is None:
        scale_bits = required
    elif required > scale_bits:
        raise PrecisionError(required, scale_bits)

    fq = FixedPointTable.from_table(fs, scale_bits, shifts[0])
    gq = FixedPointTable.from_table(gs, scale_bits, shifts[1])
    fr = _ranked(fq.entries, n)
    gr = _ranked(gq.entries, n)
    _zeta_inplace(fr, n, +1)
    _zeta_inplace(gr, n, +1)
    h = _rank_convolve(fr, gr, n, 0)
    product = FixedPointTable(n, 2 * scale_bits, shifts[0] + shifts[1], h).to_table()
    return SubsetTable(n, product.values + c * pop)


def fast_convolve_float(f: SubsetTable, g: SubsetTable) -> SubsetTable:
    """Ranked fast subset convolution in float64, for diagnostics only.

    Uses the same rescaling as the exact path but ordinary floating point, so
    the alternating sums of the Möbius step can cancel catastrophically.
    """
    _check_pair(f, g)
    n = f.n
    pop = popcounts(n)
    c = size_rescale_constant(f)
    fs = f.shifted_by_size(-c).values
    gs = g.shifted_by_size(-c).values
    sf = fs[np.isfinite(fs)].max()
    sg = gs[np.isfinite(gs)].max()
    fr = _ranked(np.exp(fs - sf), n)
    gr = _ranked(np.exp(gs - sg), n)
    _zeta_inplace(fr, n, +1)
    _zeta_inplace(gr, n, +1)
    h = _rank_convolve(fr, gr, n, 0.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(h > 0, np.log(np.where(h > 0, h, 1.0)), NEG_INF)
    return SubsetTable(n, out + sf + sg + c * pop)
