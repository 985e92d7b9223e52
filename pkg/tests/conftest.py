"""Shared fixtures: synthetic galleries at two scales.

The small dataset keeps unit tests fast; the full dataset (20 subjects,
default generator parameters, 5 noisy probes each) is what the acceptance
suite runs against and is built once per session.
"""

from __future__ import annotations

from dataclasses import dataclass

import pytest

from skullmatch import Gallery, MatchConfig, ProbeScan, generate_subject, perturb
from skullmatch.synth import SubjectParams, default_probe_spec


@dataclass
class Dataset:
    gallery: Gallery
    subjects: dict[str, ProbeScan]
    probes: list[ProbeScan]
    noise_sigma: float


def _build(seeds, sample_count, probes_per_subject, noise_sigma) -> Dataset:
    gallery = Gallery(MatchConfig())
    subjects: dict[str, ProbeScan] = {}
    probes: list[ProbeScan] = []
    for seed in seeds:
        subject_id = f"s{seed:03d}"
        scan = generate_subject(
            SubjectParams(seed=seed, sample_count=sample_count), label=subject_id
        )
        subjects[subject_id] = scan
        gallery.enroll(subject_id, scan)
    for seed in seeds:
        subject_id = f"s{seed:03d}"
        for k in range(1, probes_per_subject + 1):
            spec = default_probe_spec(seed, k, noise_sigma)
            probes.append(perturb(subjects[subject_id], spec))
    return Dataset(gallery=gallery, subjects=subjects, probes=probes, noise_sigma=noise_sigma)


@pytest.fixture(scope="session")
def small_dataset() -> Dataset:
    """6 subjects at reduced sampling; 2 probes each at 0.5 mm noise."""
    return _build(seeds=range(1, 7), sample_count=2000, probes_per_subject=2, noise_sigma=0.5)


@pytest.fixture(scope="session")
def full_dataset() -> Dataset:
    """Acceptance-scale dataset: 20 subjects, seeds 1-20, 5 probes each."""
    return _build(seeds=range(1, 21), sample_count=20000, probes_per_subject=5, noise_sigma=0.5)
