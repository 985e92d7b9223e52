"""Point clouds, named landmark triples, and rigid registration.

Coordinates are millimeters throughout. A point is a plain float64 array of
shape (3,); clouds are (N, 3) arrays wrapped in a small immutable carrier.
Landmark correspondence is always by role name (left / right / apex), never
by nearest-neighbor search, so a mislabeled file surfaces as a bad residual
instead of a silent permutation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from .errors import DegenerateLandmarks, EmptyCloud

# Below this triangle area the rotation about the landmark axis is
# numerically unconstrained.
DEGENERACY_AREA_MM2 = 1e-6

# Tolerance on R^T R = I and det R = 1 for a transform to count as rigid.
ORTHONORMALITY_TOL = 1e-9

LANDMARK_ROLES = ("left", "right", "apex")


def _as_point(value, what: str) -> NDArray[np.float64]:
    p = np.asarray(value, dtype=np.float64).reshape(-1)
    if p.shape != (3,):
        raise ValueError(f"{what} must have exactly 3 coordinates, got shape {p.shape}")
    if not np.isfinite(p).all():
        raise ValueError(f"{what} has non-finite coordinates: {p}")
    p.flags.writeable = False
    return p


def triangle_area(a: NDArray, b: NDArray, c: NDArray) -> float:
    return 0.5 * float(np.linalg.norm(np.cross(b - a, c - a)))


@dataclass(frozen=True, eq=False)
class PointCloud:
    """Finite set of 3D points in millimeters, order-preserving."""

    points: NDArray[np.float64]

    def __post_init__(self):
        pts = np.ascontiguousarray(self.points, dtype=np.float64)
        if pts.ndim != 2 or pts.shape[1] != 3:
            raise ValueError(f"point cloud must have shape (N, 3), got {pts.shape}")
        if not np.isfinite(pts).all():
            raise ValueError("point cloud contains non-finite coordinates")
        pts.flags.writeable = False
        object.__setattr__(self, "points", pts)

    def __len__(self) -> int:
        return self.points.shape[0]

    def require_nonempty(self) -> None:
        if len(self) == 0:
            raise EmptyCloud("operation requires a non-empty point cloud")

    def bounds(self) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
        """(min, max) corners of the axis-aligned bounding box."""
        self.require_nonempty()
        return self.points.min(axis=0), self.points.max(axis=0)


@dataclass(frozen=True, eq=False)
class LandmarkTriple:
    """Three named anatomical points: left, right, apex.

    The triple must be non-degenerate: pairwise distinct and spanning a
    triangle of area above DEGENERACY_AREA_MM2.
    """

    left: NDArray[np.float64]
    right: NDArray[np.float64]
    apex: NDArray[np.float64]

    def __post_init__(self):
        object.__setattr__(self, "left", _as_point(self.left, "left landmark"))
        object.__setattr__(self, "right", _as_point(self.right, "right landmark"))
        object.__setattr__(self, "apex", _as_point(self.apex, "apex landmark"))
        pts = (self.left, self.right, self.apex)
        for i in range(3):
            for j in range(i + 1, 3):
                if np.array_equal(pts[i], pts[j]):
                    raise DegenerateLandmarks(
                        f"landmarks {LANDMARK_ROLES[i]} and {LANDMARK_ROLES[j]} coincide"
                    )
        area = triangle_area(self.left, self.right, self.apex)
        if area <= DEGENERACY_AREA_MM2:
            raise DegenerateLandmarks(
                f"landmark triangle area {area:.3g} mm^2 is below the "
                f"degeneracy tolerance {DEGENERACY_AREA_MM2:g} mm^2"
            )

    def as_array(self) -> NDArray[np.float64]:
        """Rows in fixed role order (left, right, apex)."""
        return np.stack([self.left, self.right, self.apex])

    @classmethod
    def from_array(cls, rows: NDArray) -> "LandmarkTriple":
        rows = np.asarray(rows, dtype=np.float64)
        if rows.shape != (3, 3):
            raise ValueError(f"landmark array must have shape (3, 3), got {rows.shape}")
        return cls(rows[0], rows[1], rows[2])

    def transformed(self, t: "RigidTransform") -> "LandmarkTriple":
        moved = t.apply(self.as_array())
        return LandmarkTriple(moved[0], moved[1], moved[2])


@dataclass(frozen=True, eq=False)
class RigidTransform:
    """Proper rigid map p -> rotation @ p + translation.

    The rotation must be orthonormal with determinant +1 within
    ORTHONORMALITY_TOL; reflections and scaling are rejected outright.
    """

    rotation: NDArray[np.float64]
    translation: NDArray[np.float64]

    def __post_init__(self):
        r = np.ascontiguousarray(self.rotation, dtype=np.float64)
        t = _as_point(self.translation, "translation")
        if r.shape != (3, 3):
            raise ValueError(f"rotation must be 3x3, got {r.shape}")
        if not np.isfinite(r).all():
            raise ValueError("rotation contains non-finite entries")
        if np.abs(r.T @ r - np.eye(3)).max() > ORTHONORMALITY_TOL:
            raise ValueError("rotation is not orthonormal within tolerance")
        if abs(np.linalg.det(r) - 1.0) > ORTHONORMALITY_TOL:
            raise ValueError("rotation determinant differs from +1 (reflection or scale?)")
        r.flags.writeable = False
        object.__setattr__(self, "rotation", r)
        object.__setattr__(self, "translation", t)

    @classmethod
    def identity(cls) -> "RigidTransform":
        return cls(np.eye(3), np.zeros(3))

    def apply(self, points: NDArray) -> NDArray[np.float64]:
        """Map an (N, 3) or (3,) array of points."""
        pts = np.asarray(points, dtype=np.float64)
        return pts @ self.rotation.T + self.translation

    def compose(self, inner: "RigidTransform") -> "RigidTransform":
        """self after inner: (self.compose(inner))(p) == self(inner(p))."""
        return RigidTransform(
            self.rotation @ inner.rotation,
            self.rotation @ inner.translation + self.translation,
        )

    def inverse(self) -> "RigidTransform":
        rt = self.rotation.T
        return RigidTransform(rt, -(rt @ self.translation))

    def is_identity(self) -> bool:
        return np.array_equal(self.rotation, np.eye(3)) and not self.translation.any()


@dataclass(frozen=True, eq=False)
class LandmarkFit:
    """Registration result: the transform plus its leftover RMS error."""

    transform: RigidTransform
    residual_rms: float


def rigid_from_landmarks(src: LandmarkTriple, dst: LandmarkTriple) -> LandmarkFit:
    """Least-squares rigid transform taking src landmarks onto dst landmarks.

    Closed-form orthogonal Procrustes on the three role-matched
    correspondences: center both triples, take the SVD of the cross
    covariance, and flip the smallest singular direction if the raw
    solution is a reflection. Scale is never estimated.

    Identical triples short-circuit to the exact identity so that
    self-registration is bit-exact, not merely accurate to rounding.
    """
    s = src.as_array()
    d = dst.as_array()
    if np.array_equal(s, d):
        return LandmarkFit(RigidTransform.identity(), 0.0)

    centroid_s = s.mean(axis=0)
    centroid_d = d.mean(axis=0)
    u, _, vt = np.linalg.svd((s - centroid_s).T @ (d - centroid_d))
    sign = np.sign(np.linalg.det(vt.T @ u.T))
    if sign == 0:  # numerically impossible for non-degenerate triples
        raise DegenerateLandmarks("registration produced a singular rotation")
    flip = np.diag([1.0, 1.0, sign])
    rotation = vt.T @ flip @ u.T
    translation = centroid_d - rotation @ centroid_s

    fit = RigidTransform(rotation, translation)
    residual = fit.apply(s) - d
    rms = float(np.sqrt(np.mean(np.sum(residual * residual, axis=1))))
    return LandmarkFit(fit, rms)


def apply_transform(t: RigidTransform, cloud: PointCloud) -> PointCloud:
    """Transform every point, preserving order."""
    cloud.require_nonempty()
    return PointCloud(t.apply(cloud.points))


def compose(outer: RigidTransform, inner: RigidTransform) -> RigidTransform:
    return outer.compose(inner)


def invert(t: RigidTransform) -> RigidTransform:
    return t.inverse()
