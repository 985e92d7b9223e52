"""Deterministic synthetic skull-like scans for end-to-end testing.

A subject is a bumpy ellipsoid: points sampled direction-uniformly on the
unit sphere, mapped to an ellipsoid surface, then displaced radially by a
seeded sum of Gaussian bumps. Different seeds give pairwise-distinguishable
shapes; the same seed reproduces the cloud bit-for-bit on any platform
because all randomness flows through the splitmix64 stream in
skullmatch.rng (constants documented there), never the host RNG.

Landmarks are the sampled points extreme along +x (right), -x (left), and
+z (apex), mimicking manually chosen anatomical points.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateLandmarks
from .geometry import LandmarkTriple, PointCloud, RigidTransform
from .matcher import ProbeScan
from .rng import PortableRng

log = logging.getLogger(__name__)

# Angular radius range (radians) of the Gaussian bumps. Wide bumps change
# broad swaths of the surface, which is what separates subjects at 1 mm
# voxels; widths are drawn per bump so no two subjects share a layout.
BUMP_WIDTH_RANGE_RAD = (0.35, 0.75)

# Landmark jitter retries before giving up (jitter large enough to flatten
# a skull-sized triangle 64 times in a row does not happen by accident).
MAX_JITTER_ATTEMPTS = 64


@dataclass(frozen=True)
class SubjectParams:
    """Recipe for one synthetic subject. Same values, same cloud, always."""

    seed: int
    semi_axes: tuple[float, float, float] = (95.0, 120.0, 80.0)
    bump_count: int = 12
    bump_amplitude: float = 3.0
    sample_count: int = 20000

    def __post_init__(self):
        if any(a <= 0 for a in self.semi_axes):
            raise ValueError(f"semi_axes must be positive, got {self.semi_axes}")
        if self.bump_count < 0:
            raise ValueError(f"bump_count must be >= 0, got {self.bump_count}")
        if self.bump_amplitude < 0:
            raise ValueError(f"bump_amplitude must be >= 0, got {self.bump_amplitude}")
        if self.sample_count < 100:
            raise ValueError(f"sample_count must be >= 100, got {self.sample_count}")


@dataclass(frozen=True)
class PerturbSpec:
    """Measurement-style corruption: point noise, random pose, landmark jitter."""

    noise_sigma: float = 0.0
    pose_seed: int = 0
    landmark_jitter_sigma: float = 0.0

    def __post_init__(self):
        if self.noise_sigma < 0 or self.landmark_jitter_sigma < 0:
            raise ValueError("sigmas must be >= 0")


def generate_subject(params: SubjectParams, label: str | None = None) -> ProbeScan:
    """Sample one subject's surface cloud plus its landmark triple."""
    rng = PortableRng(params.seed)

    bump_dirs = rng.unit_vectors(params.bump_count)
    bump_signs = np.where(rng.uniforms(params.bump_count) < 0.5, -1.0, 1.0)
    bump_amps = bump_signs * params.bump_amplitude * rng.uniform(params.bump_count, 0.5, 1.0)
    lo, hi = BUMP_WIDTH_RANGE_RAD
    bump_widths = rng.uniform(params.bump_count, lo, hi)

    dirs = rng.unit_vectors(params.sample_count)
    base = dirs * np.asarray(params.semi_axes, dtype=np.float64)

    if params.bump_count:
        cosines = np.clip(dirs @ bump_dirs.T, -1.0, 1.0)
        angles = np.arccos(cosines)
        offsets = (np.exp(-0.5 * (angles / bump_widths) ** 2) * bump_amps).sum(axis=1)
        radial = base / np.linalg.norm(base, axis=1, keepdims=True)
        points = base + radial * offsets[:, None]
    else:
        points = base

    right = points[int(np.argmax(points[:, 0]))]
    left = points[int(np.argmin(points[:, 0]))]
    apex = points[int(np.argmax(points[:, 2]))]
    return ProbeScan(
        cloud=PointCloud(points),
        landmarks=LandmarkTriple(left, right, apex),
        label=label,
    )


def perturb(scan: ProbeScan, spec: PerturbSpec) -> ProbeScan:
    """Corrupt a scan: per-point Gaussian noise, then a seeded random rigid
    pose applied jointly to cloud and landmarks, then independent landmark
    jitter. Deterministic per (scan, spec).

    If jitter degenerates the landmark triple, the jitter alone is redrawn
    from an incremented child stream; the retry count is logged.
    """
    rng = PortableRng(spec.pose_seed)

    noisy = scan.cloud.points + rng.normals(scan.cloud.points.shape, spec.noise_sigma)
    pose = RigidTransform(rng.rotation(), rng.uniform(3, -100.0, 100.0))
    posed_points = pose.apply(noisy)
    posed_landmarks = pose.apply(scan.landmarks.as_array())

    landmarks = None
    for attempt in range(MAX_JITTER_ATTEMPTS):
        jitter = rng.derive(attempt).normals((3, 3), spec.landmark_jitter_sigma)
        try:
            landmarks = LandmarkTriple.from_array(posed_landmarks + jitter)
            break
        except DegenerateLandmarks:
            continue
    if landmarks is None:
        raise DegenerateLandmarks(
            f"landmark jitter sigma {spec.landmark_jitter_sigma} mm degenerated the "
            f"triple {MAX_JITTER_ATTEMPTS} times in a row"
        )
    if attempt:
        log.warning("landmark jitter redrawn %d time(s) to keep the triple usable", attempt)

    return ProbeScan(cloud=PointCloud(posed_points), landmarks=landmarks, label=scan.label)


def default_probe_spec(subject_seed: int, probe_index: int, noise_sigma: float,
                       landmark_jitter_sigma: float = 0.0) -> PerturbSpec:
    """Stable per-(subject, probe) perturbation seeds for dataset builds."""
    pose_seed = (subject_seed * 1_000_003 + probe_index * 7919 + 1) & ((1 << 63) - 1)
    return PerturbSpec(
        noise_sigma=noise_sigma,
        pose_seed=pose_seed,
        landmark_jitter_sigma=landmark_jitter_sigma,
    )


