# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled occupancy kernels, the fast backend.

Bit-compatibility contract: arithmetic mirrors _numpy.py exactly. Voxel
indices come from floor((coord - origin) / voxel_size) in float64 (a true
division, never a multiply by a precomputed reciprocal, which rounds
differently), bounds are tested on the floored doubles before the integer
cast, and the flat index is x-fastest.
"""

from libc.math cimport floor
from libc.stdint cimport int64_t, uint64_t

NAME = "native"

cdef extern from *:
    """
    #if defined(__GNUC__) || defined(__clang__)
    #  define SM_POPCOUNT64(x) ((int)__builtin_popcountll(x))
    #else
    static int sm_popcount64_fallback(unsigned long long v) {
        v = v - ((v >> 1) & 0x5555555555555555ULL);
        v = (v & 0x3333333333333333ULL) + ((v >> 2) & 0x3333333333333333ULL);
        v = (v + (v >> 4)) & 0x0F0F0F0F0F0F0F0FULL;
        return (int)((v * 0x0101010101010101ULL) >> 56);
    }
    #  define SM_POPCOUNT64(x) sm_popcount64_fallback(x)
    #endif
    """
    int SM_POPCOUNT64(uint64_t x) nogil


def fill_occupancy(const double[:, ::1] points, const double[::1] origin,
                   double voxel_size, Py_ssize_t nx, Py_ssize_t ny, Py_ssize_t nz,
                   uint64_t[::1] words):
    """Set the occupancy bit for every in-bounds point; return clipped count."""
    cdef Py_ssize_t n = points.shape[0]
    cdef Py_ssize_t clipped = 0
    cdef Py_ssize_t p
    cdef double fx, fy, fz
    cdef int64_t flat
    with nogil:
        for p in range(n):
            fx = floor((points[p, 0] - origin[0]) / voxel_size)
            fy = floor((points[p, 1] - origin[1]) / voxel_size)
            fz = floor((points[p, 2] - origin[2]) / voxel_size)
            if 0 <= fx < nx and 0 <= fy < ny and 0 <= fz < nz:
                flat = (<int64_t>fx) + nx * ((<int64_t>fy) + ny * (<int64_t>fz))
                words[flat >> 6] |= (<uint64_t>1) << (flat & 63)
            else:
                clipped += 1
    return clipped


def popcount_words(const uint64_t[::1] words):
    """Number of set bits across the packed bitset."""
    cdef Py_ssize_t n = words.shape[0]
    cdef Py_ssize_t i = 0
    # four accumulators keep the popcnt units busy
    cdef int64_t t0 = 0, t1 = 0, t2 = 0, t3 = 0
    with nogil:
        while i + 4 <= n:
            t0 += SM_POPCOUNT64(words[i])
            t1 += SM_POPCOUNT64(words[i + 1])
            t2 += SM_POPCOUNT64(words[i + 2])
            t3 += SM_POPCOUNT64(words[i + 3])
            i += 4
        while i < n:
            t0 += SM_POPCOUNT64(words[i])
            i += 1
    return t0 + t1 + t2 + t3


def intersect_count(const uint64_t[::1] a, const uint64_t[::1] b):
    """Number of bits set in both packed bitsets (must be equal length)."""
    if a.shape[0] != b.shape[0]:
        raise ValueError("bitsets have different word counts")
    cdef Py_ssize_t n = a.shape[0]
    cdef Py_ssize_t i = 0
    cdef int64_t t0 = 0, t1 = 0, t2 = 0, t3 = 0
    with nogil:
        while i + 4 <= n:
            t0 += SM_POPCOUNT64(a[i] & b[i])
            t1 += SM_POPCOUNT64(a[i + 1] & b[i + 1])
            t2 += SM_POPCOUNT64(a[i + 2] & b[i + 2])
            t3 += SM_POPCOUNT64(a[i + 3] & b[i + 3])
            i += 4
        while i < n:
            t0 += SM_POPCOUNT64(a[i] & b[i])
            i += 1
    return t0 + t1 + t2 + t3
