"""Exception types raised across the package.

Everything derives from SkullMatchError so callers (notably the CLI) can
turn any domain failure into a single machine-parsable error line.
"""


class SkullMatchError(Exception):
    """Base class for all domain errors."""


class FileFormatError(SkullMatchError):
    """A scan, landmark, or grid file could not be parsed.

    Carries the offending path and 1-based line number when known.
    """

    def __init__(self, path, line: int | None, reason: str):
        self.path = str(path)
        self.line = line
        self.reason = reason
        where = f"{self.path}:{line}" if line is not None else self.path
        super().__init__(f"{where}: {reason}")


class DegenerateLandmarks(SkullMatchError):
    """Landmark triple is collinear or has duplicate points."""


class EmptyCloud(SkullMatchError):
    """Operation requires at least one point."""


class AllPointsClipped(SkullMatchError):
    """No point of the cloud fell inside the target grid."""


class GridSpecMismatch(SkullMatchError):
    """Two grids with different geometry cannot be compared."""


class DegenerateScore(SkullMatchError):
    """Similarity is undefined because both grids are empty."""


class DuplicateSubject(SkullMatchError):
    """Subject id already enrolled in the gallery."""


class UnknownSubject(SkullMatchError):
    """Subject id not present in the gallery."""


class EmptyGallery(SkullMatchError):
    """Gallery holds no enrolled subjects."""


class CorruptGallery(SkullMatchError):
    """A gallery directory failed to load.

    Carries the offending file so the operator knows what to inspect.
    """

    def __init__(self, path, reason: str):
        self.path = str(path)
        self.reason = reason
        super().__init__(f"{self.path}: {reason}")


class VersionMismatch(CorruptGallery):
    """Gallery manifest was written by an unknown format version."""


class NoGenuineTrials(SkullMatchError):
    """Error-rate sweep needs at least one genuine trial."""


class NoImpostorTrials(SkullMatchError):
    """Error-rate sweep needs at least one impostor trial."""
