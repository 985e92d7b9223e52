"""skullmatch: 3D shape identification by landmark alignment and voxel matching.

Pipeline: register a probe's three named landmarks onto a template
(closed-form rigid fit), rasterize the aligned probe into the template's
occupancy grid, count matched pixels, and accept or reject against a
threshold. Galleries persist enrolled templates; the evaluator calibrates
thresholds via FAR/FRR sweeps.
"""

from .errors import (
    AllPointsClipped,
    CorruptGallery,
    DegenerateLandmarks,
    DegenerateScore,
    DuplicateSubject,
    EmptyCloud,
    EmptyGallery,
    FileFormatError,
    GridSpecMismatch,
    NoGenuineTrials,
    NoImpostorTrials,
    SkullMatchError,
    UnknownSubject,
    VersionMismatch,
)
from .evaluate import EvalReport, Trial, rank1, run_trials, sweep
from .gallery import Gallery, IdentifyResult, TemplateRecord, load
from .geometry import (
    LandmarkFit,
    LandmarkTriple,
    PointCloud,
    RigidTransform,
    apply_transform,
    compose,
    invert,
    rigid_from_landmarks,
)
from .matcher import Decision, MatchConfig, ProbeScan, match_probe
from .synth import PerturbSpec, SubjectParams, generate_subject, perturb
from .voxel import (
    GridSpec,
    MatchScore,
    VoxelGrid,
    occupied_centers,
    occupied_count,
    overlap,
    similarity,
    voxelize,
)

__version__ = "0.1.0"

__all__ = [
    "AllPointsClipped",
    "CorruptGallery",
    "Decision",
    "DegenerateLandmarks",
    "DegenerateScore",
    "DuplicateSubject",
    "EmptyCloud",
    "EmptyGallery",
    "EvalReport",
    "FileFormatError",
    "Gallery",
    "GridSpec",
    "GridSpecMismatch",
    "IdentifyResult",
    "LandmarkFit",
    "LandmarkTriple",
    "MatchConfig",
    "MatchScore",
    "NoGenuineTrials",
    "NoImpostorTrials",
    "PerturbSpec",
    "PointCloud",
    "ProbeScan",
    "RigidTransform",
    "SkullMatchError",
    "SubjectParams",
    "TemplateRecord",
    "Trial",
    "UnknownSubject",
    "VersionMismatch",
    "VoxelGrid",
    "apply_transform",
    "compose",
    "generate_subject",
    "invert",
    "load",
    "match_probe",
    "occupied_centers",
    "occupied_count",
    "overlap",
    "perturb",
    "rank1",
    "rigid_from_landmarks",
    "run_trials",
    "similarity",
    "sweep",
    "voxelize",
]
