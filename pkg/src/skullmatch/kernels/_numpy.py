"""Pure-numpy occupancy kernels, the fallback backend.

Every function here must stay bit-compatible with the compiled backend in
_native.pyx: same arithmetic (subtract, divide, floor, all in float64),
same bounds test on the floored doubles, same x-fastest flat indexing.
Grids built by either backend are interchangeable on disk and in memory.
"""

from __future__ import annotations

import numpy as np

NAME = "numpy"


def fill_occupancy(points, origin, voxel_size, nx, ny, nz, words) -> int:
    """Set the occupancy bit for every in-bounds point; return clipped count.

    points: (N, 3) float64, origin: (3,) float64, words: packed uint64 bitset
    (bit f of the grid lives at words[f >> 6] bit (f & 63), f = i + nx*(j + ny*k)).
    """
    f = np.floor((points - origin) / voxel_size)
    inside = (
        (f[:, 0] >= 0) & (f[:, 0] < nx)
        & (f[:, 1] >= 0) & (f[:, 1] < ny)
        & (f[:, 2] >= 0) & (f[:, 2] < nz)
    )
    ijk = f[inside].astype(np.int64)
    flat = ijk[:, 0] + nx * (ijk[:, 1] + ny * ijk[:, 2])
    masks = np.left_shift(np.uint64(1), (flat & 63).astype(np.uint64))
    np.bitwise_or.at(words, flat >> 6, masks)
    return int(points.shape[0] - np.count_nonzero(inside))


def popcount_words(words) -> int:
    """Number of set bits across the packed bitset."""
    return int(np.bitwise_count(words).sum())


def intersect_count(a, b) -> int:
    """Number of bits set in both packed bitsets (must be equal length)."""
    if a.shape[0] != b.shape[0]:
        raise ValueError("bitsets have different word counts")
    return int(np.bitwise_count(a & b).sum())
