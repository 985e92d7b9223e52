"""File format round-trips and parse errors with line numbers."""

import numpy as np
import pytest

from skullmatch.errors import FileFormatError
from skullmatch.geometry import LandmarkTriple, PointCloud
from skullmatch.io import (
    read_cloud,
    read_grid_dump,
    read_landmarks,
    read_ply,
    read_xyz,
    replace_directory,
    write_grid_dump,
    write_landmarks,
    write_xyz,
)
from skullmatch.rng import PortableRng
from skullmatch.voxel import GridSpec, VoxelGrid, voxelize


# -- XYZ -----------------------------------------------------------------

def test_xyz_round_trip_is_bit_exact(tmp_path):
    rng = PortableRng(1)
    cloud = PointCloud(rng.uniform(300, -1e3, 1e3).reshape(100, 3))
    path = tmp_path / "cloud.xyz"
    write_xyz(path, cloud)
    back = read_xyz(path)
    assert np.array_equal(back.points, cloud.points)


def test_xyz_comments_and_blanks(tmp_path):
    path = tmp_path / "c.xyz"
    path.write_text("# header\n\n1 2 3   # trailing comment\n4 5 6\n")
    cloud = read_xyz(path)
    assert np.array_equal(cloud.points, [[1, 2, 3], [4, 5, 6]])


@pytest.mark.parametrize(
    "content,line",
    [
        ("1 2 3\n1 2\n", 2),
        ("1 2 3\n4 x 6\n", 2),
        ("1 2 3 4\n", 1),
    ],
)
def test_xyz_errors_carry_line_numbers(tmp_path, content, line):
    path = tmp_path / "bad.xyz"
    path.write_text(content)
    with pytest.raises(FileFormatError) as err:
        read_xyz(path)
    assert err.value.line == line


# -- PLY -----------------------------------------------------------------

PLY_WITH_EXTRAS = """\
ply
format ascii 1.0
comment generated for tests
element vertex 3
property float nx
property float x
property float y
property float z
property uchar red
element face 1
property list uchar int vertex_indices
end_header
0.0 1.5 2.5 3.5 255
0.0 -1.0 -2.0 -3.0 0
0.0 10.25 0.5 7.125 9
3 0 1 2
"""


def test_ply_reads_xyz_among_other_properties(tmp_path):
    path = tmp_path / "scan.ply"
    path.write_text(PLY_WITH_EXTRAS)
    cloud = read_ply(path)
    assert np.array_equal(
        cloud.points, [[1.5, 2.5, 3.5], [-1.0, -2.0, -3.0], [10.25, 0.5, 7.125]]
    )
    assert np.array_equal(read_cloud(path).points, cloud.points)


@pytest.mark.parametrize(
    "mutator,expected_line",
    [
        (lambda t: t.replace("ply\n", "plyx\n", 1), 1),
        (lambda t: t.replace("format ascii 1.0", "format binary_little_endian 1.0"), 2),
        (lambda t: t.replace("element vertex 3", "element vertex three"), 4),
        (lambda t: t.replace("0.0 10.25 0.5 7.125 9\n", "0.0 oops 0.5 7.125 9\n"), 15),
        (lambda t: t.replace("0.0 10.25 0.5 7.125 9\n3 0 1 2\n", ""), 14),
    ],
)
def test_ply_errors_carry_line_numbers(tmp_path, mutator, expected_line):
    path = tmp_path / "bad.ply"
    path.write_text(mutator(PLY_WITH_EXTRAS))
    with pytest.raises(FileFormatError) as err:
        read_ply(path)
    assert err.value.line == expected_line


def test_ply_requires_xyz_properties(tmp_path):
    path = tmp_path / "noxyz.ply"
    path.write_text(
        "ply\nformat ascii 1.0\nelement vertex 1\nproperty float a\n"
        "property float b\nproperty float c\nend_header\n1 2 3\n"
    )
    with pytest.raises(FileFormatError):
        read_ply(path)


# -- landmarks -------------------------------------------------------------

def test_landmarks_round_trip(tmp_path):
    triple = LandmarkTriple((1.25, -2.5, 3.75), (10.0, 0.125, 0.0), (0.0, 0.0, 9.5))
    path = tmp_path / "a.lmk"
    write_landmarks(path, triple)
    back = read_landmarks(path)
    assert np.array_equal(back.as_array(), triple.as_array())


def test_landmarks_any_role_order(tmp_path):
    path = tmp_path / "b.lmk"
    path.write_text("apex,0,0,5\nright,4,0,0\nleft,-4,0,0\n")
    triple = read_landmarks(path)
    assert np.array_equal(triple.apex, [0, 0, 5])
    assert np.array_equal(triple.right, [4, 0, 0])
    assert np.array_equal(triple.left, [-4, 0, 0])


@pytest.mark.parametrize(
    "content,line",
    [
        ("left,0,0,0\nright,1,0,0\ntop,0,1,0\n", 3),        # unknown role
        ("left,0,0,0\nleft,1,0,0\napex,0,1,0\n", 2),        # duplicate role
        ("left,0,0\nright,1,0,0\napex,0,1,0\n", 1),         # short row
        ("left,0,z,0\nright,1,0,0\napex,0,1,0\n", 1),       # bad float
    ],
)
def test_landmark_errors_carry_line_numbers(tmp_path, content, line):
    path = tmp_path / "bad.lmk"
    path.write_text(content)
    with pytest.raises(FileFormatError) as err:
        read_landmarks(path)
    assert err.value.line == line


def test_landmark_missing_role(tmp_path):
    path = tmp_path / "missing.lmk"
    path.write_text("left,0,0,0\nright,1,0,0\n")
    with pytest.raises(FileFormatError) as err:
        read_landmarks(path)
    assert "apex" in str(err.value)


# -- grid dump ---------------------------------------------------------------

def test_grid_dump_round_trips_random_grids(tmp_path):
    rng = PortableRng(73)
    for trial in range(10):
        dims = tuple(1 + int(u * 20) for u in rng.uniforms(3))
        spec = GridSpec(0.75, (-3.5, 2.25, -10.0), dims)
        total = spec.total_voxels
        flat = np.unique((rng.uniforms(max(1, total // 3)) * total).astype(np.int64))
        grid = VoxelGrid.from_flat_indices(spec, flat)
        path = tmp_path / f"g{trial}.rle"
        write_grid_dump(path, grid)
        assert read_grid_dump(path).same_bits(grid)


@pytest.mark.parametrize("flat", [[], [0], "full", "tail"])
def test_grid_dump_edge_occupancies(tmp_path, flat):
    spec = GridSpec(1.0, (0.0, 0.0, 0.0), (5, 5, 3))  # 75 voxels: tail word in play
    if flat == "full":
        flat = list(range(spec.total_voxels))
    elif flat == "tail":
        flat = [spec.total_voxels - 1]
    grid = VoxelGrid.from_flat_indices(spec, flat)
    path = tmp_path / "edge.rle"
    write_grid_dump(path, grid)
    assert read_grid_dump(path).same_bits(grid)


def test_grid_dump_of_voxelized_cloud(tmp_path):
    rng = PortableRng(99)
    cloud = PointCloud(rng.uniform(900, -30.0, 30.0).reshape(300, 3))
    grid = voxelize(cloud, GridSpec.covering(cloud, 1.0, 2))
    path = tmp_path / "cloud.rle"
    write_grid_dump(path, grid)
    back = read_grid_dump(path)
    assert back.same_bits(grid)
    assert back.spec == grid.spec


@pytest.mark.parametrize(
    "content",
    [
        "voxelgrid 2 2\n4\n",                      # short header
        "wrongmagic 2 2 1 1.0 0 0 0\n4\n",         # bad magic
        "voxelgrid 2 2 1 1.0 0 0 0\n3\n",          # runs sum below total
        "voxelgrid 2 2 1 1.0 0 0 0\n5\n",          # runs sum above total
        "voxelgrid 2 2 1 1.0 0 0 0\n2 x\n",        # non-integer run
        "voxelgrid 2 2 1 1.0 0 0 0\n-1 5\n",       # negative run
        "voxelgrid 0 2 1 1.0 0 0 0\n\n",           # invalid dims
    ],
)
def test_grid_dump_rejects_corruption(tmp_path, content):
    path = tmp_path / "bad.rle"
    path.write_text(content)
    with pytest.raises(FileFormatError):
        read_grid_dump(path)


# -- directory swap -----------------------------------------------------------

def test_replace_directory_swaps_and_cleans(tmp_path):
    final = tmp_path / "gallery"
    final.mkdir()
    (final / "old.txt").write_text("old")
    staging = tmp_path / ".gallery.staging"
    staging.mkdir()
    (staging / "new.txt").write_text("new")
    replace_directory(staging, final)
    assert (final / "new.txt").read_text() == "new"
    assert not (final / "old.txt").exists()
    assert not staging.exists()
    leftovers = [p for p in tmp_path.iterdir() if p.name != "gallery"]
    assert leftovers == []
