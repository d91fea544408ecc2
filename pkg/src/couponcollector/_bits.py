"""Subset-lattice helpers: bitmask utilities and vectorized lattice transforms.

Subsets of the type universe {0, .., m-1} are represented as integer
bitmasks (bit i set <=> type i in the set). Arrays indexed by mask have
length 2**m and run in increasing bitmask order.
"""

from collections.abc import Iterable

import numpy as np


def mask_of(types: Iterable[int]) -> int:
    """Bitmask of a collection of type indices."""
    mask = 0
    for t in types:
        mask |= 1 << t
    return mask


def types_of(mask: int) -> tuple[int, ...]:
    """Sorted tuple of type indices present in a bitmask."""
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return tuple(out)


def subset_sums(values) -> np.ndarray:
    """All 2**m subset sums of ``values``, indexed by bitmask.

    Built by doubling: each bit extends the table with the previous block
    shifted by that bit's value, so every entry costs one addition.
    """
    values = np.asarray(values, dtype=np.float64)
    m = values.shape[0]
    out = np.zeros(1 << m, dtype=np.float64)
    for b in range(m):
        size = 1 << b
        out[size : 2 * size] = out[:size] + values[b]
    return out


def popcounts(m: int) -> np.ndarray:
    """Array of bit counts for every mask below 2**m."""
    out = np.zeros(1 << m, dtype=np.int64)
    for b in range(m):
        size = 1 << b
        out[size : 2 * size] = out[:size] + 1
    return out


def subset_zeta(values: np.ndarray) -> np.ndarray:
    """Sum-over-subsets transform: out[T] = sum of values[S] for S subseteq T.

    Standard in-place bitwise dynamic program, vectorized one bit at a time.
    """
    out = np.array(values, dtype=np.float64, copy=True)
    n = out.shape[0]
    m = n.bit_length() - 1
    if 1 << m != n:
        raise ValueError("length must be a power of two")
    for b in range(m):
        block = out.reshape(-1, 2, 1 << b)
        block[:, 1, :] += block[:, 0, :]
    return out
