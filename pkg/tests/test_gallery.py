"""Enrollment, identification, verification, persistence."""

import json

import numpy as np
import pytest

from skullmatch.errors import (
    CorruptGallery,
    DuplicateSubject,
    EmptyGallery,
    UnknownSubject,
    VersionMismatch,
)
from skullmatch.gallery import MANIFEST_NAME, Gallery, load
from skullmatch.matcher import MatchConfig
from skullmatch.synth import SubjectParams, generate_subject


def small_scan(seed, label=None):
    return generate_subject(SubjectParams(seed=seed, sample_count=800), label=label)


@pytest.fixture()
def gallery():
    g = Gallery(MatchConfig())
    for seed in (1, 2, 3):
        g.enroll(f"s{seed:03d}", small_scan(seed, f"s{seed:03d}"))
    return g


# -- enroll ----------------------------------------------------------------

def test_enroll_grows_gallery():
    g = Gallery()
    assert len(g) == 0
    g.enroll("alice", small_scan(1))
    assert len(g) == 1 and "alice" in g


def test_enroll_duplicate_rejected(gallery):
    with pytest.raises(DuplicateSubject):
        gallery.enroll("s001", small_scan(1))


def test_enroll_bad_id_rejected():
    g = Gallery()
    for bad in ("", "with/slash", ".hidden", "a b"):
        with pytest.raises(ValueError):
            g.enroll(bad, small_scan(1))


def test_every_enrolled_subject_self_matches(gallery):
    for seed in (1, 2, 3):
        decision = gallery.verify(f"s{seed:03d}", small_scan(seed))
        assert decision.score.dice == 1.0
        assert decision.accepted


# -- identify / verify --------------------------------------------------------

def test_identify_ranks_self_first(gallery):
    result = gallery.identify(small_scan(2, "s002"))
    assert result.ranked[0][0] == "s002"
    assert result.ranked[0][1].dice == 1.0
    assert result.best_accepted == "s002"
    assert [sid for sid, _ in result.ranked] != []
    assert {sid for sid, _ in result.ranked} == set(gallery.subject_ids)


def test_identify_unknown_probe_not_accepted(gallery):
    # subject 9 was never enrolled; 0.9 default threshold rejects the best hit
    result = gallery.identify(small_scan(9, "s009"))
    assert result.best_accepted is None


def test_identify_empty_gallery():
    with pytest.raises(EmptyGallery):
        Gallery().identify(small_scan(1))


def test_identify_order_independent_of_enrollment_order():
    scans = {f"s{seed:03d}": small_scan(seed) for seed in (1, 2, 3, 4)}
    forward, backward = Gallery(), Gallery()
    for sid in sorted(scans):
        forward.enroll(sid, scans[sid])
    for sid in sorted(scans, reverse=True):
        backward.enroll(sid, scans[sid])
    probe = small_scan(3, "s003")
    a = forward.identify(probe)
    b = backward.identify(probe)
    assert [(sid, s.dice) for sid, s in a.ranked] == [(sid, s.dice) for sid, s in b.ranked]


def test_identify_ties_break_by_ascending_id():
    g = Gallery()
    scan = small_scan(5)
    g.enroll("beta", scan)
    g.enroll("alpha", scan)  # same scan twice: identical scores guaranteed
    result = g.identify(small_scan(5, "alpha"))
    assert [sid for sid, _ in result.ranked[:2]] == ["alpha", "beta"]
    assert result.ranked[0][1].dice == result.ranked[1][1].dice == 1.0


def test_verify_matches_identify_entry(gallery):
    probe = small_scan(1, "s001")
    by_verify = {sid: gallery.verify(sid, probe).score for sid in gallery.subject_ids}
    by_identify = dict(gallery.identify(probe).ranked)
    for sid in gallery.subject_ids:
        assert by_verify[sid] == by_identify[sid]


def test_verify_unknown_subject(gallery):
    with pytest.raises(UnknownSubject):
        gallery.verify("nobody", small_scan(1))


def test_verify_impostor_rejected_at_default_threshold(gallery):
    decision = gallery.verify("s001", small_scan(2))
    assert not decision.accepted


# -- persistence -----------------------------------------------------------------

def test_round_trip_empty_gallery(tmp_path):
    g = Gallery(MatchConfig(voxel_size=1.5, decision_threshold=0.8))
    g.save(tmp_path / "gal")
    back = load(tmp_path / "gal")
    assert len(back) == 0
    assert back.config == g.config


def test_round_trip_preserves_everything(tmp_path, gallery):
    gallery.save(tmp_path / "gal")
    back = load(tmp_path / "gal")
    assert back.config == gallery.config
    assert back.subject_ids == gallery.subject_ids
    for sid in gallery.subject_ids:
        a, b = gallery.get(sid), back.get(sid)
        assert np.array_equal(a.cloud.points, b.cloud.points)
        assert np.array_equal(a.landmarks.as_array(), b.landmarks.as_array())
        assert a.grid.same_bits(b.grid)
        assert a.enrolled_at == b.enrolled_at


def test_round_trip_preserves_match_results(tmp_path, gallery):
    gallery.save(tmp_path / "gal")
    back = load(tmp_path / "gal")
    probe = small_scan(2, "s002")
    assert gallery.identify(probe).ranked == back.identify(probe).ranked


def test_save_replaces_previous_contents(tmp_path, gallery):
    target = tmp_path / "gal"
    gallery.save(target)
    first = sorted(p.name for p in target.iterdir())
    gallery.enroll("s099", small_scan(9))
    gallery.save(target)
    assert (target / "s099").is_dir()
    assert not any(p.name.startswith(".") for p in tmp_path.iterdir())
    assert set(first) <= {p.name for p in target.iterdir()}


def test_version_mismatch(tmp_path, gallery):
    gallery.save(tmp_path / "gal")
    manifest_path = tmp_path / "gal" / MANIFEST_NAME
    manifest = json.loads(manifest_path.read_text())
    manifest["version"] = 99
    manifest_path.write_text(json.dumps(manifest))
    with pytest.raises(VersionMismatch):
        load(tmp_path / "gal")


def test_corrupt_manifest(tmp_path, gallery):
    gallery.save(tmp_path / "gal")
    (tmp_path / "gal" / MANIFEST_NAME).write_text("{ not json")
    with pytest.raises(CorruptGallery):
        load(tmp_path / "gal")


def test_missing_subject_file(tmp_path, gallery):
    gallery.save(tmp_path / "gal")
    (tmp_path / "gal" / "s002" / "grid.rle").unlink()
    with pytest.raises(CorruptGallery) as err:
        load(tmp_path / "gal")
    assert "grid.rle" in str(err.value)


def test_corrupt_grid_reports_file(tmp_path, gallery):
    gallery.save(tmp_path / "gal")
    grid_path = tmp_path / "gal" / "s001" / "grid.rle"
    grid_path.write_text("voxelgrid 2 2 1 1.0 0 0 0\n99\n")
    with pytest.raises(CorruptGallery) as err:
        load(tmp_path / "gal")
    assert "grid.rle" in str(err.value)


def test_inconsistent_grid_config_detected(tmp_path, gallery):
    gallery.save(tmp_path / "gal")
    manifest_path = tmp_path / "gal" / MANIFEST_NAME
    manifest = json.loads(manifest_path.read_text())
    manifest["voxel_size_mm"] = 2.5  # grids were built at 1.0
    manifest_path.write_text(json.dumps(manifest))
    with pytest.raises(CorruptGallery):
        load(tmp_path / "gal")


def test_load_nondirectory(tmp_path):
    with pytest.raises(CorruptGallery):
        load(tmp_path / "nope")
