"""Bit-mask subset kernel: enumeration, finite differences, order statistics.

Subsets of d components are encoded as integers: bit k set means component
k (0-based) is in the set. The empty set is 0, the full set is 2**d - 1.
The dimension is capped at 30 so tables indexed by mask fit in memory.
"""

from __future__ import annotations

import math
from typing import Callable, Iterator, Sequence

import numpy as np

from .errors import GeomlawError

MAX_DIM = 30


def validate_dim(d: int) -> int:
    if not isinstance(d, int) or d < 1:
        raise GeomlawError("dimension-too-large", f"dimension must be a positive integer, got {d!r}")
    if d > MAX_DIM:
        raise GeomlawError("dimension-too-large", f"dimension {d} exceeds the supported maximum {MAX_DIM}")
    return d


def full_mask(d: int) -> int:
    return (1 << d) - 1


def popcount(mask: int) -> int:
    return int(mask).bit_count()


def mask_to_indices(mask: int) -> tuple[int, ...]:
    """0-based component indices contained in the mask, ascending."""
    out = []
    k = 0
    while mask:
        if mask & 1:
            out.append(k)
        mask >>= 1
        k += 1
    return tuple(out)


def indices_to_mask(indices: Sequence[int]) -> int:
    m = 0
    for k in indices:
        m |= 1 << k
    return m


def subsets_iter(dim: int, predicate: Callable[[int], bool] | None = None) -> Iterator[int]:
    """All 2**dim masks in ascending order, optionally filtered."""
    validate_dim(dim)
    for mask in range(1 << dim):
        if predicate is None or predicate(mask):
            yield mask


def nonempty_subsets(dim: int) -> Iterator[int]:
    return subsets_iter(dim, lambda m: m != 0)


def difference(x: Sequence[float], j: int, k: int) -> float:
    """Alternating binomial difference of order j at offset k.

    difference(x, j, k) = sum_{i=0}^{j} (-1)^i C(j, i) x[k + i];
    order 0 is the identity. Binomials are exact integers up to j = 29.
    """
    if j < 0 or k < 0:
        raise GeomlawError("index-out-of-range", f"order and offset must be nonnegative, got j={j}, k={k}")
    if k + j >= len(x):
        raise GeomlawError(
            "index-out-of-range",
            f"difference of order {j} at offset {k} needs {k + j + 1} entries, sequence has {len(x)}",
        )
    return float(sum((-1) ** i * math.comb(j, i) * x[k + i] for i in range(j + 1)))


def order_stats(n: Sequence[int]) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """Non-decreasing sort of n plus the stable sorting permutation.

    Returns (sorted values, perm) with n[perm[0]] <= ... <= n[perm[d-1]];
    ties keep ascending original index (stable sort).
    """
    arr = np.asarray(n)
    perm = np.argsort(arr, kind="stable")
    return tuple(int(v) for v in arr[perm]), tuple(int(i) for i in perm)
