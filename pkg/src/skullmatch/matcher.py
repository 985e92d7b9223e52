"""Two-stage probe-vs-template matching.

Stage 1 aligns the probe to the template through the three named landmarks
(closed-form rigid fit). Stage 2 rasterizes the aligned probe into the
template's own grid and scores the matched pixels. A probe is accepted only
when the Dice score clears the decision threshold AND the landmark residual
is small enough for the pixel count to mean anything; a large residual with
a decent pixel score is a mislabeled or wrong-subject scan, not a match.

The template frame is canonical: probes are always rasterized into the
template's cached GridSpec, so every probe is comparable against a fixed
signature. Everything is pure and reentrant; concurrent matches against one
immutable template are safe.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING

from .geometry import (
    LandmarkTriple,
    PointCloud,
    RigidTransform,
    apply_transform,
    rigid_from_landmarks,
)
from .voxel import MatchScore, similarity, voxelize

if TYPE_CHECKING:
    from .gallery import TemplateRecord


@dataclass(frozen=True, eq=False)
class ProbeScan:
    """An unknown scan presented for matching.

    label carries ground truth for evaluation runs only; it never
    influences matching. Landmark points need not be members of the cloud.
    """

    cloud: PointCloud
    landmarks: LandmarkTriple
    label: str | None = None


@dataclass(frozen=True)
class MatchConfig:
    """Matching parameters shared by a whole gallery.

    decision_threshold 1.0 reproduces the strict literal rule (only an
    exactly equal pixel count is a match), which rejects everything under
    real noise; 0.90 is a usable default for near-identical rescans, and
    evaluation sweeps calibrate the operating point for a noise regime.
    """

    voxel_size: float = 1.0
    padding_voxels: int = 2
    decision_threshold: float = 0.90
    max_landmark_residual: float = 2.0

    def __post_init__(self):
        if not self.voxel_size > 0:
            raise ValueError(f"voxel_size must be positive, got {self.voxel_size}")
        if self.padding_voxels < 0:
            raise ValueError(f"padding_voxels must be >= 0, got {self.padding_voxels}")
        if not 0.0 <= self.decision_threshold <= 1.0:
            raise ValueError(f"decision_threshold must be in [0, 1], got {self.decision_threshold}")
        if self.max_landmark_residual < 0:
            raise ValueError(f"max_landmark_residual must be >= 0, got {self.max_landmark_residual}")


@dataclass(frozen=True, eq=False)
class Decision:
    """Outcome of one probe-vs-template match."""

    accepted: bool
    score: MatchScore
    landmark_residual_rms: float
    transform: RigidTransform


def match_probe(probe: ProbeScan, template: "TemplateRecord", cfg: MatchConfig) -> Decision:
    """Align, rasterize, score, decide. Deterministic for identical inputs.

    Raises DegenerateLandmarks for unusable landmark triples and
    AllPointsClipped when the aligned probe misses the template grid
    entirely (gross misalignment or wrong units).
    """
    fit = rigid_from_landmarks(probe.landmarks, template.landmarks)
    aligned = apply_transform(fit.transform, probe.cloud)
    probe_grid = voxelize(aligned, template.grid.spec)
    score = similarity(probe_grid, template.grid)
    accepted = (
        score.dice >= cfg.decision_threshold
        and fit.residual_rms <= cfg.max_landmark_residual
    )
    return Decision(
        accepted=accepted,
        score=score,
        landmark_residual_rms=fit.residual_rms,
        transform=fit.transform,
    )
