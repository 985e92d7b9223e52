"""Axis-aligned occupancy grids and matched-pixel scoring.

A grid cell ("pixel") is binary: occupied iff at least one point falls in
it, regardless of how many. Occupancy is stored as a packed uint64 bitset
in x-fastest order: flat index f = i + nx*(j + ny*k) lives at bit (f & 63)
of word f >> 6. The hot loops (rasterization, popcounts) live in
skullmatch.kernels with compiled and numpy implementations.

Similarity reports the raw double-counted statistic matched_count =
2 * |A and B| (a matched pixel counted once per shape, so two coincident
10000-pixel shapes score 20000) alongside its normalized form, the Dice
coefficient. Decisions elsewhere use Dice; the raw count is kept because it
is resolution-dependent and human-checkable.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
from numpy.typing import NDArray

from . import kernels
from .errors import AllPointsClipped, DegenerateScore, GridSpecMismatch
from .geometry import PointCloud

# Bitset size guard: 2^34 bits packs to 2 GiB of words, beyond any sane
# grid for this pipeline and well inside addressable range.
MAX_TOTAL_VOXELS = 2**34


@dataclass(frozen=True)
class GridSpec:
    """Grid geometry: cell edge length (mm), corner of cell (0,0,0), cell counts.

    Plain tuples keep the dataclass hashable and make equality exact, which
    overlap() relies on: grids are only comparable when their geometry is
    bit-identical.
    """

    voxel_size: float
    origin: tuple[float, float, float]
    dims: tuple[int, int, int]

    def __post_init__(self):
        if not (np.isfinite(self.voxel_size) and self.voxel_size > 0):
            raise ValueError(f"voxel_size must be positive, got {self.voxel_size}")
        origin = tuple(float(v) for v in self.origin)
        dims = tuple(int(v) for v in self.dims)
        if len(origin) != 3 or not all(np.isfinite(origin)):
            raise ValueError(f"origin must be 3 finite coordinates, got {self.origin}")
        if len(dims) != 3 or any(d < 1 for d in dims):
            raise ValueError(f"dims must be 3 positive integers, got {self.dims}")
        total = dims[0] * dims[1] * dims[2]
        if total > MAX_TOTAL_VOXELS:
            raise ValueError(f"grid of {total} voxels exceeds the bitset limit {MAX_TOTAL_VOXELS}")
        object.__setattr__(self, "voxel_size", float(self.voxel_size))
        object.__setattr__(self, "origin", origin)
        object.__setattr__(self, "dims", dims)

    @property
    def total_voxels(self) -> int:
        nx, ny, nz = self.dims
        return nx * ny * nz

    @property
    def word_count(self) -> int:
        return (self.total_voxels + 63) // 64

    @property
    def origin_array(self) -> NDArray[np.float64]:
        return np.array(self.origin, dtype=np.float64)

    @classmethod
    def covering(cls, cloud: PointCloud, voxel_size: float, padding_voxels: int = 2) -> "GridSpec":
        """Bounding-box grid around a cloud, padded on every side.

        Every point of the cloud is strictly in bounds, so rasterizing the
        cloud into its own covering grid never clips. The origin sits an
        extra half voxel below the bounding box: the axis-extreme points
        then land mid-cell instead of exactly on a cell boundary, so
        femtometer-scale registration rounding cannot flip their voxel and
        exact-pose rescans score Dice 1.0 exactly.
        """
        if padding_voxels < 0:
            raise ValueError("padding_voxels must be >= 0")
        lo, hi = cloud.bounds()
        origin = lo - (padding_voxels + 0.5) * voxel_size
        dims = np.floor((hi - origin) / voxel_size).astype(np.int64) + 1 + padding_voxels
        return cls(voxel_size, tuple(origin), tuple(int(d) for d in dims))


@dataclass(frozen=True, eq=False)
class VoxelGrid:
    """Immutable occupancy bitset over a GridSpec.

    clipped_count records how many input points fell outside the grid when
    the grid came from voxelize(); it is diagnostic only and not part of
    grid identity.
    """

    spec: GridSpec
    words: NDArray[np.uint64]
    clipped_count: int = 0

    def __post_init__(self):
        w = np.ascontiguousarray(self.words, dtype=np.uint64)
        if w.shape != (self.spec.word_count,):
            raise ValueError(
                f"bitset has {w.shape[0]} words, spec needs exactly {self.spec.word_count}"
            )
        # Bits past total_voxels in the last word must stay zero or the
        # popcounts would drift; mask defensively on construction.
        tail = self.spec.total_voxels & 63
        if tail and w.size and (w[-1] >> np.uint64(tail)):
            w = w.copy()
            w[-1] &= (np.uint64(1) << np.uint64(tail)) - np.uint64(1)
        if w.flags.writeable:
            # Never freeze (or alias) a caller-owned buffer. Internal
            # constructors pre-freeze their fresh arrays to skip this copy.
            w = w.copy()
            w.flags.writeable = False
        object.__setattr__(self, "words", w)

    @cached_property
    def occupied(self) -> int:
        return int(kernels.popcount_words(self.words))

    def same_bits(self, other: "VoxelGrid") -> bool:
        return self.spec == other.spec and np.array_equal(self.words, other.words)

    @classmethod
    def from_flat_indices(cls, spec: GridSpec, flat, clipped_count: int = 0) -> "VoxelGrid":
        """Build a grid from x-fastest flat voxel indices (deduplicated)."""
        flat = np.asarray(flat, dtype=np.int64)
        if flat.size and (flat.min() < 0 or flat.max() >= spec.total_voxels):
            raise ValueError("flat index out of range for grid dims")
        words = np.zeros(spec.word_count, dtype=np.uint64)
        masks = np.left_shift(np.uint64(1), (flat & 63).astype(np.uint64))
        np.bitwise_or.at(words, flat >> 6, masks)
        words.flags.writeable = False
        return cls(spec, words, clipped_count)


@dataclass(frozen=True)
class MatchScore:
    """Similarity of two grids of identical geometry.

    matched_count is the raw double-counted statistic 2 * intersection;
    dice is its normalized form 2|A∩B| / (|A|+|B|); jaccard is
    |A∩B| / |A∪B|. clipped_a / clipped_b surface how many points were
    dropped when each grid was rasterized (0 for grids built in-frame).
    """

    matched_count: int
    intersection: int
    count_a: int
    count_b: int
    dice: float
    jaccard: float
    clipped_a: int = 0
    clipped_b: int = 0


def voxelize(cloud: PointCloud, spec: GridSpec) -> VoxelGrid:
    """Rasterize a cloud: cell (i,j,k) is occupied iff some point floors into it.

    Points outside [0, dims) are clipped, never wrapped; the count is kept
    on the returned grid. Raises AllPointsClipped when nothing lands inside,
    which almost always means a wrong origin, wrong units, or an unaligned
    probe.
    """
    cloud.require_nonempty()
    words = np.zeros(spec.word_count, dtype=np.uint64)
    clipped = int(
        kernels.fill_occupancy(
            cloud.points,
            spec.origin_array,
            spec.voxel_size,
            spec.dims[0],
            spec.dims[1],
            spec.dims[2],
            words,
        )
    )
    if clipped == len(cloud):
        raise AllPointsClipped(
            f"all {clipped} points fell outside the grid (origin {spec.origin}, dims {spec.dims})"
        )
    words.flags.writeable = False
    return VoxelGrid(spec, words, clipped)


def occupied_count(grid: VoxelGrid) -> int:
    """Number of occupied voxels."""
    return grid.occupied


def overlap(a: VoxelGrid, b: VoxelGrid) -> int:
    """|A∩B|: voxels occupied in both grids. Geometry must match exactly."""
    if a.spec != b.spec:
        raise GridSpecMismatch(
            f"cannot compare grids with different geometry: {a.spec} vs {b.spec}"
        )
    return int(kernels.intersect_count(a.words, b.words))


def similarity(a: VoxelGrid, b: VoxelGrid) -> MatchScore:
    """Full match score between two grids of identical geometry."""
    inter = overlap(a, b)
    count_a = a.occupied
    count_b = b.occupied
    total = count_a + count_b
    if total == 0:
        raise DegenerateScore("similarity of two empty grids is undefined")
    union = total - inter
    return MatchScore(
        matched_count=2 * inter,
        intersection=inter,
        count_a=count_a,
        count_b=count_b,
        dice=2.0 * inter / total,
        jaccard=inter / union if union > 0 else 1.0,
        clipped_a=a.clipped_count,
        clipped_b=b.clipped_count,
    )


def occupied_flat_indices(grid: VoxelGrid) -> NDArray[np.int64]:
    """Sorted x-fastest flat indices of all occupied voxels."""
    if grid.words.size == 0:
        return np.zeros(0, dtype=np.int64)
    bits = np.unpackbits(grid.words.astype("<u8").view(np.uint8), bitorder="little")
    return np.flatnonzero(bits[: grid.spec.total_voxels]).astype(np.int64)


def occupied_centers(grid: VoxelGrid) -> PointCloud:
    """Cloud of the centers of all occupied voxels.

    Voxelizing this cloud back into the same spec reproduces the bitset
    exactly (centers sit half a cell from every boundary).
    """
    flat = occupied_flat_indices(grid)
    nx, ny, _ = grid.spec.dims
    ijk = np.stack([flat % nx, (flat // nx) % ny, flat // (nx * ny)], axis=1)
    centers = grid.spec.origin_array + (ijk + 0.5) * grid.spec.voxel_size
    return PointCloud(centers)
