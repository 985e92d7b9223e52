"""Enrollment database: template records, 1:1 verify, 1:N identify, persistence.

A gallery is a set of enrolled subjects sharing one MatchConfig. The config
is gallery-wide because cached grids depend on it; scores produced under
different configs are not comparable, so changing the config means
re-enrolling.

On-disk layout (human-inspectable, diff-friendly, bit-exact round-trip):

    gallery.manifest          JSON: version, config fields, subject ids
    <subject_id>/scan.xyz     enrolled cloud
    <subject_id>/landmarks.lmk
    <subject_id>/grid.rle     cached occupancy signature
    <subject_id>/meta.json    enrollment timestamp

Writers stage into a sibling directory and swap it in, so a reader never
observes a partially written gallery (single-writer contract; concurrent
readers of a loaded gallery are safe, everything is immutable).
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

from . import io as formats
from .errors import (
    CorruptGallery,
    DuplicateSubject,
    EmptyGallery,
    FileFormatError,
    UnknownSubject,
    VersionMismatch,
)
from .geometry import LandmarkTriple, PointCloud
from .matcher import Decision, MatchConfig, ProbeScan, match_probe
from .voxel import GridSpec, MatchScore, VoxelGrid, voxelize

MANIFEST_NAME = "gallery.manifest"
MANIFEST_VERSION = 1

# ids become directory names, so keep them filesystem-safe
_ID_PATTERN = re.compile(r"^[A-Za-z0-9][A-Za-z0-9._-]*$")


@dataclass(frozen=True, eq=False)
class TemplateRecord:
    """One enrolled subject: canonical cloud, landmarks, cached grid."""

    subject_id: str
    cloud: PointCloud
    landmarks: LandmarkTriple
    grid: VoxelGrid
    enrolled_at: datetime

    @classmethod
    def from_scan(
        cls,
        subject_id: str,
        scan: ProbeScan,
        cfg: MatchConfig,
        enrolled_at: datetime | None = None,
    ) -> "TemplateRecord":
        """Build the record, rasterizing the scan into its own covering grid."""
        spec = GridSpec.covering(scan.cloud, cfg.voxel_size, cfg.padding_voxels)
        grid = voxelize(scan.cloud, spec)
        return cls(
            subject_id=subject_id,
            cloud=scan.cloud,
            landmarks=scan.landmarks,
            grid=grid,
            enrolled_at=enrolled_at or datetime.now(timezone.utc),
        )


@dataclass(frozen=True)
class IdentifyResult:
    """Gallery ranking for one probe.

    ranked covers every enrolled subject, sorted by Dice descending with
    ties broken by ascending subject id. best_accepted names the top
    subject when its full decision (threshold and landmark-residual gate)
    accepts, else None.
    """

    ranked: tuple[tuple[str, MatchScore], ...]
    best_accepted: str | None


class Gallery:
    """Mutable enrollment set; matching operations are read-only."""

    def __init__(self, config: MatchConfig | None = None):
        self.config = config or MatchConfig()
        self._records: dict[str, TemplateRecord] = {}

    def __len__(self) -> int:
        return len(self._records)

    def __contains__(self, subject_id: str) -> bool:
        return subject_id in self._records

    @property
    def subject_ids(self) -> tuple[str, ...]:
        return tuple(sorted(self._records))

    def get(self, subject_id: str) -> TemplateRecord:
        try:
            return self._records[subject_id]
        except KeyError:
            raise UnknownSubject(f"subject {subject_id!r} is not enrolled") from None

    def enroll(self, subject_id: str, scan: ProbeScan) -> TemplateRecord:
        """Add a subject; its grid is cached under the gallery config."""
        if not _ID_PATTERN.match(subject_id or ""):
            raise ValueError(
                f"subject id {subject_id!r} must be non-empty and filesystem-safe "
                f"(letters, digits, '.', '_', '-')"
            )
        if subject_id in self._records:
            raise DuplicateSubject(f"subject {subject_id!r} is already enrolled")
        record = TemplateRecord.from_scan(subject_id, scan, self.config)
        self._records[subject_id] = record
        return record

    def verify(self, subject_id: str, probe: ProbeScan) -> Decision:
        """1:1 check of a claimed identity."""
        return match_probe(probe, self.get(subject_id), self.config)

    def identify(self, probe: ProbeScan) -> IdentifyResult:
        """1:N search over every enrolled subject, deterministic ranking."""
        if not self._records:
            raise EmptyGallery("empty gallery")
        decisions = {
            subject_id: match_probe(probe, self._records[subject_id], self.config)
            for subject_id in self.subject_ids
        }
        ranked = sorted(
            ((sid, d.score) for sid, d in decisions.items()),
            key=lambda item: (-item[1].dice, item[0]),
        )
        top_id = ranked[0][0]
        return IdentifyResult(
            ranked=tuple(ranked),
            best_accepted=top_id if decisions[top_id].accepted else None,
        )

    # -- persistence ----------------------------------------------------

    def save(self, directory) -> None:
        """Write the gallery, replacing any previous contents atomically."""
        final = Path(directory)
        staging = final.parent / f".{final.name}.staging"
        if staging.exists():
            import shutil

            shutil.rmtree(staging)
        staging.mkdir(parents=True)

        for subject_id in self.subject_ids:
            record = self._records[subject_id]
            subject_dir = staging / subject_id
            subject_dir.mkdir()
            formats.write_xyz(subject_dir / "scan.xyz", record.cloud)
            formats.write_landmarks(subject_dir / "landmarks.lmk", record.landmarks)
            formats.write_grid_dump(subject_dir / "grid.rle", record.grid)
            (subject_dir / "meta.json").write_text(
                json.dumps({"enrolled_at": record.enrolled_at.isoformat()}) + "\n",
                encoding="utf-8",
            )

        manifest = {
            "version": MANIFEST_VERSION,
            "voxel_size_mm": self.config.voxel_size,
            "padding_voxels": self.config.padding_voxels,
            "decision_threshold": self.config.decision_threshold,
            "max_landmark_residual_mm": self.config.max_landmark_residual,
            "subjects": list(self.subject_ids),
        }
        (staging / MANIFEST_NAME).write_text(
            json.dumps(manifest, indent=2) + "\n", encoding="utf-8"
        )
        formats.replace_directory(staging, final)


def load(directory) -> Gallery:
    """Load a gallery written by Gallery.save."""
    root = Path(directory)
    manifest_path = root / MANIFEST_NAME
    if not manifest_path.is_file():
        raise CorruptGallery(manifest_path, "manifest missing (not a gallery directory?)")
    try:
        manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise CorruptGallery(manifest_path, f"manifest is not valid JSON: {exc}") from None

    version = manifest.get("version")
    if version != MANIFEST_VERSION:
        raise VersionMismatch(
            manifest_path, f"unknown gallery version {version!r} (expected {MANIFEST_VERSION})"
        )
    try:
        config = MatchConfig(
            voxel_size=float(manifest["voxel_size_mm"]),
            padding_voxels=int(manifest["padding_voxels"]),
            decision_threshold=float(manifest["decision_threshold"]),
            max_landmark_residual=float(manifest["max_landmark_residual_mm"]),
        )
        subjects = list(manifest["subjects"])
    except (KeyError, TypeError, ValueError) as exc:
        raise CorruptGallery(manifest_path, f"bad manifest field: {exc}") from None

    gallery = Gallery(config)
    for subject_id in subjects:
        subject_dir = root / str(subject_id)
        try:
            cloud = formats.read_xyz(subject_dir / "scan.xyz")
            landmarks = formats.read_landmarks(subject_dir / "landmarks.lmk")
            grid = formats.read_grid_dump(subject_dir / "grid.rle")
            meta = json.loads((subject_dir / "meta.json").read_text(encoding="utf-8"))
            enrolled_at = datetime.fromisoformat(meta["enrolled_at"])
        except FileNotFoundError as exc:
            raise CorruptGallery(exc.filename, "file missing from gallery") from None
        except FileFormatError as exc:
            raise CorruptGallery(exc.path, exc.reason) from None
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            raise CorruptGallery(subject_dir / "meta.json", f"bad metadata: {exc}") from None
        if grid.spec.voxel_size != config.voxel_size:
            raise CorruptGallery(
                subject_dir / "grid.rle",
                f"grid voxel size {grid.spec.voxel_size} differs from gallery "
                f"config {config.voxel_size}",
            )
        record = TemplateRecord(
            subject_id=str(subject_id),
            cloud=cloud,
            landmarks=landmarks,
            grid=grid,
            enrolled_at=enrolled_at,
        )
        gallery._records[str(subject_id)] = record
    return gallery
