"""File formats: ASCII PLY and XYZ clouds, .lmk landmarks, RLE grid dumps.

All parsers report 1-based line numbers on failure. Writers emit floats via
repr, the shortest form that round-trips float64 exactly, so saved data is
both human-readable and bit-faithful.
"""

from __future__ import annotations

import os
from pathlib import Path

import numpy as np

from .errors import FileFormatError
from .geometry import LANDMARK_ROLES, LandmarkTriple, PointCloud
from .voxel import GridSpec, VoxelGrid


def _float(token: str, path, line: int, what: str) -> float:
    try:
        return float(token)
    except ValueError:
        raise FileFormatError(path, line, f"bad {what}: {token!r}") from None


# -- XYZ ---------------------------------------------------------------

def read_xyz(path) -> PointCloud:
    """Plain text cloud: one `x y z` triple per line, `#` starts a comment."""
    rows = []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            text = raw.split("#", 1)[0].strip()
            if not text:
                continue
            parts = text.split()
            if len(parts) != 3:
                raise FileFormatError(path, lineno, f"expected 3 values, got {len(parts)}")
            rows.append([_float(p, path, lineno, "coordinate") for p in parts])
    cloud = np.array(rows, dtype=np.float64).reshape(-1, 3)
    if not np.isfinite(cloud).all():
        bad = int(np.flatnonzero(~np.isfinite(cloud).all(axis=1))[0])
        raise FileFormatError(path, None, f"non-finite coordinate in point {bad}")
    return PointCloud(cloud)


def write_xyz(path, cloud: PointCloud) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for x, y, z in cloud.points.tolist():
            fh.write(f"{x!r} {y!r} {z!r}\n")


# -- PLY ---------------------------------------------------------------

_PLY_NUMERIC = {
    "char", "uchar", "short", "ushort", "int", "uint",
    "int8", "uint8", "int16", "uint16", "int32", "uint32",
    "float", "double", "float32", "float64",
}


def read_ply(path) -> PointCloud:
    """ASCII PLY vertex positions; faces and extra properties are ignored."""
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().splitlines()

    if not lines or lines[0].strip() != "ply":
        raise FileFormatError(path, 1, "not a PLY file (missing 'ply' magic)")

    vertex_count = None
    prop_names: list[str] = []
    in_vertex_element = False
    seen_format = False
    body_start = None

    for idx, raw in enumerate(lines[1:], start=2):
        line = raw.strip()
        if not line or line.startswith("comment") or line.startswith("obj_info"):
            continue
        parts = line.split()
        if parts[0] == "format":
            if parts[1:2] != ["ascii"]:
                raise FileFormatError(path, idx, f"unsupported PLY format {line!r} (ascii only)")
            seen_format = True
        elif parts[0] == "element":
            if len(parts) != 3:
                raise FileFormatError(path, idx, f"malformed element line {line!r}")
            in_vertex_element = parts[1] == "vertex"
            if in_vertex_element:
                try:
                    vertex_count = int(parts[2])
                except ValueError:
                    raise FileFormatError(path, idx, f"bad vertex count {parts[2]!r}") from None
        elif parts[0] == "property":
            if in_vertex_element:
                if parts[1] == "list":
                    raise FileFormatError(path, idx, "list property on vertex element")
                if len(parts) != 3 or parts[1] not in _PLY_NUMERIC:
                    raise FileFormatError(path, idx, f"unsupported vertex property {line!r}")
                prop_names.append(parts[2])
        elif parts[0] == "end_header":
            body_start = idx
            break
        else:
            raise FileFormatError(path, idx, f"unexpected header line {line!r}")

    if body_start is None:
        raise FileFormatError(path, len(lines), "missing end_header")
    if not seen_format:
        raise FileFormatError(path, 1, "missing 'format ascii 1.0' line")
    if vertex_count is None:
        raise FileFormatError(path, body_start, "no 'element vertex' in header")
    try:
        cols = [prop_names.index(axis) for axis in ("x", "y", "z")]
    except ValueError:
        raise FileFormatError(
            path, body_start, f"vertex element lacks x/y/z properties (has {prop_names})"
        ) from None

    rows = np.empty((vertex_count, 3), dtype=np.float64)
    lineno = body_start
    filled = 0
    for raw in lines[body_start:]:
        lineno += 1
        text = raw.strip()
        if not text:
            continue
        if filled == vertex_count:
            break  # faces or other elements follow; ignore them
        parts = text.split()
        if len(parts) < len(prop_names):
            raise FileFormatError(
                path, lineno, f"vertex row has {len(parts)} values, header declares {len(prop_names)}"
            )
        for axis, col in enumerate(cols):
            rows[filled, axis] = _float(parts[col], path, lineno, "vertex coordinate")
        filled += 1
    if filled != vertex_count:
        raise FileFormatError(
            path, lineno, f"expected {vertex_count} vertex rows, file ends after {filled}"
        )
    if not np.isfinite(rows).all():
        raise FileFormatError(path, None, "non-finite vertex coordinate")
    return PointCloud(rows)


def read_cloud(path) -> PointCloud:
    """Dispatch on extension: .ply is PLY, anything else is XYZ text."""
    if Path(path).suffix.lower() == ".ply":
        return read_ply(path)
    return read_xyz(path)


# -- landmarks (.lmk) --------------------------------------------------

def read_landmarks(path) -> LandmarkTriple:
    """Three lines of `role,x,y,z`; roles left/right/apex in any order."""
    found: dict[str, np.ndarray] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            text = raw.split("#", 1)[0].strip()
            if not text:
                continue
            parts = [p.strip() for p in text.split(",")]
            if len(parts) != 4:
                raise FileFormatError(path, lineno, f"expected 'role,x,y,z', got {text!r}")
            role = parts[0]
            if role not in LANDMARK_ROLES:
                raise FileFormatError(
                    path, lineno, f"unknown landmark role {role!r} (expected one of {LANDMARK_ROLES})"
                )
            if role in found:
                raise FileFormatError(path, lineno, f"duplicate landmark role {role!r}")
            found[role] = np.array(
                [_float(p, path, lineno, "landmark coordinate") for p in parts[1:]]
            )
    missing = [r for r in LANDMARK_ROLES if r not in found]
    if missing:
        raise FileFormatError(path, None, f"missing landmark roles: {missing}")
    return LandmarkTriple(found["left"], found["right"], found["apex"])


def write_landmarks(path, landmarks: LandmarkTriple) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for role, point in zip(LANDMARK_ROLES, landmarks.as_array().tolist()):
            fh.write(f"{role},{point[0]!r},{point[1]!r},{point[2]!r}\n")


# -- grid dump (RLE) ---------------------------------------------------
#
# Header line:  voxelgrid nx ny nz voxel_size ox oy oz
# Body: whitespace-separated run lengths over the flat bit sequence,
# alternating empty/occupied and starting with an empty run (possibly 0).
# Runs must sum to nx*ny*nz; round-trips are bit-exact.

def write_grid_dump(path, grid: VoxelGrid) -> None:
    spec = grid.spec
    nx, ny, nz = spec.dims
    ox, oy, oz = spec.origin
    bits = np.unpackbits(grid.words.astype("<u8").view(np.uint8), bitorder="little")
    bits = bits[: spec.total_voxels]
    boundaries = np.flatnonzero(np.diff(bits)) + 1
    edges = np.concatenate([[0], boundaries, [bits.size]])
    runs = np.diff(edges).tolist()
    if bits.size and bits[0] == 1:
        runs.insert(0, 0)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"voxelgrid {nx} {ny} {nz} {spec.voxel_size!r} {ox!r} {oy!r} {oz!r}\n")
        for start in range(0, len(runs), 16):
            fh.write(" ".join(str(r) for r in runs[start : start + 16]) + "\n")


def read_grid_dump(path) -> VoxelGrid:
    with open(path, encoding="utf-8") as fh:
        header = fh.readline()
        parts = header.split()
        if len(parts) != 8 or parts[0] != "voxelgrid":
            raise FileFormatError(path, 1, f"bad grid dump header {header.strip()!r}")
        try:
            nx, ny, nz = int(parts[1]), int(parts[2]), int(parts[3])
            voxel_size = float(parts[4])
            origin = (float(parts[5]), float(parts[6]), float(parts[7]))
        except ValueError:
            raise FileFormatError(path, 1, f"bad grid dump header {header.strip()!r}") from None
        try:
            spec = GridSpec(voxel_size, origin, (nx, ny, nz))
        except ValueError as exc:
            raise FileFormatError(path, 1, str(exc)) from None

        body = fh.read().split()
    try:
        runs = [int(tok) for tok in body]
    except ValueError:
        raise FileFormatError(path, None, "non-integer run length in grid dump") from None
    if any(r < 0 for r in runs):
        raise FileFormatError(path, None, "negative run length in grid dump")
    total = sum(runs)
    if total != spec.total_voxels:
        raise FileFormatError(
            path, None, f"run lengths sum to {total}, grid has {spec.total_voxels} voxels"
        )
    bits = np.zeros(spec.total_voxels, dtype=np.uint8)
    pos = 0
    value = 0
    for run in runs:
        if value:
            bits[pos : pos + run] = 1
        pos += run
        value ^= 1
    padded = np.zeros(spec.word_count * 8, dtype=np.uint8)
    packed = np.packbits(bits, bitorder="little")
    padded[: packed.size] = packed
    words = padded.view("<u8").astype(np.uint64)
    words.flags.writeable = False
    return VoxelGrid(spec, words)


def replace_directory(staging: Path, final: Path) -> None:
    """Swap a fully-written staging directory into place.

    POSIX rename cannot atomically replace a non-empty directory, so an
    existing target is renamed aside first and removed after the swap;
    readers see either the old tree or the new one, never a partial write.
    """
    import shutil

    staging = Path(staging)
    final = Path(final)
    if final.exists():
        trash = final.with_name(final.name + f".old-{os.getpid()}")
        os.rename(final, trash)
        os.rename(staging, final)
        shutil.rmtree(trash)
    else:
        os.rename(staging, final)
