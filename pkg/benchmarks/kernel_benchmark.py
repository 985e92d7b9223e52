#!/usr/bin/env python3
"""Compare the compiled and numpy occupancy kernels on a realistic workload.

Workload: one default synthetic subject (20k surface points) rasterized
into its 1 mm covering grid (~8M voxels), plus popcount and intersection
over the packed bitsets. Also times a full probe match per backend in a
subprocess with SKULLMATCH_BACKEND forced, which exercises the import-time
selection path end to end.

Usage: python benchmarks/kernel_benchmark.py [--repeats N]
"""

import argparse
import os
import statistics
import subprocess
import sys
import time

import numpy as np

from skullmatch.kernels import available_backends
from skullmatch.synth import SubjectParams, generate_subject
from skullmatch.voxel import GridSpec

END_TO_END_SNIPPET = """
import time
from skullmatch import kernels, MatchConfig, match_probe
from skullmatch.gallery import TemplateRecord
from skullmatch.synth import PerturbSpec, SubjectParams, generate_subject, perturb

scan = generate_subject(SubjectParams(seed=1), label="s001")
template = TemplateRecord.from_scan("s001", scan, MatchConfig())
probe = perturb(scan, PerturbSpec(noise_sigma=0.5, pose_seed=7))
match_probe(probe, template, MatchConfig())  # warm up
times = []
for _ in range({repeats}):
    t0 = time.perf_counter()
    match_probe(probe, template, MatchConfig())
    times.append(time.perf_counter() - t0)
times.sort()
print(f"{{kernels.BACKEND}} {{times[len(times)//2]*1e3:.2f}}")
"""


def median_ms(fn, repeats: int) -> float:
    times = []
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        times.append(time.perf_counter() - start)
    return statistics.median(times) * 1e3


def bench_kernels(repeats: int) -> None:
    backends = available_backends()
    scan = generate_subject(SubjectParams(seed=1))
    points = scan.cloud.points
    spec = GridSpec.covering(scan.cloud, voxel_size=1.0, padding_voxels=2)
    origin = spec.origin_array
    nx, ny, nz = spec.dims

    print(
        f"workload: {len(points)} points into {nx}x{ny}x{nz} "
        f"(~{spec.total_voxels/1e6:.1f}M voxels, {spec.word_count} words), "
        f"median of {repeats} runs"
    )
    print()
    header = f"{'kernel':<18}" + "".join(f"{name:>12}" for name in backends)
    if len(backends) == 2:
        header += f"{'speedup':>10}"
    print(header)

    # shared inputs so every backend sees identical work
    reference_words = {}
    for name, mod in backends.items():
        words = np.zeros(spec.word_count, dtype=np.uint64)
        mod.fill_occupancy(points, origin, spec.voxel_size, nx, ny, nz, words)
        reference_words[name] = words
    first = next(iter(reference_words.values()))
    assert all(np.array_equal(first, w) for w in reference_words.values()), (
        "backends disagree; kernel bug"
    )
    other = np.roll(first, 1)

    rows = {
        "fill_occupancy": lambda mod: mod.fill_occupancy(
            points, origin, spec.voxel_size, nx, ny, nz,
            np.zeros(spec.word_count, dtype=np.uint64),
        ),
        "popcount_words": lambda mod: mod.popcount_words(first),
        "intersect_count": lambda mod: mod.intersect_count(first, other),
    }
    for label, call in rows.items():
        cells = {name: median_ms(lambda m=mod: call(m), repeats)
                 for name, mod in backends.items()}
        line = f"{label:<18}" + "".join(f"{cells[name]:>10.3f}ms" for name in backends)
        if "native" in cells and "numpy" in cells and cells["native"] > 0:
            line += f"{cells['numpy'] / cells['native']:>9.1f}x"
        print(line)


def bench_end_to_end(repeats: int) -> None:
    print()
    print(f"end-to-end match_probe (subprocess per backend, median of {repeats}):")
    for backend in available_backends():
        env = dict(os.environ, SKULLMATCH_BACKEND=backend)
        out = subprocess.run(
            [sys.executable, "-c", END_TO_END_SNIPPET.format(repeats=repeats)],
            env=env, capture_output=True, text=True, check=True,
        ).stdout.split()
        print(f"  {out[0]:<8} {out[1]} ms/match")


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=30)
    args = parser.parse_args()
    backends = available_backends()
    if "native" not in backends:
        print("note: compiled kernels not built; benchmarking numpy fallback only")
    bench_kernels(args.repeats)
    bench_end_to_end(max(5, args.repeats // 3))
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
