"""Command-line surface.

Subcommands: demo-squares, gen, enroll, identify, verify, eval. Decision
output is line-oriented and stable (`ACCEPT|REJECT dice=<6dp> matched=<int>
residual_mm=<6dp>`) so shell pipelines can branch on it. Exit codes:
0 success/accept, 1 reject or no-match, 2 usage or data error, with a
one-line machine-parsable reason on stderr.
"""

from __future__ import annotations

import argparse
import logging
import math
import re
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import gallery as gallery_mod
from . import io as formats
from .errors import SkullMatchError
from .evaluate import Trial, format_summary, rank1, run_trials, sweep, write_report_csv
from .gallery import Gallery
from .geometry import PointCloud
from .matcher import Decision, MatchConfig, ProbeScan
from .synth import SubjectParams, default_probe_spec, generate_subject, perturb
from .voxel import GridSpec, similarity, voxelize

_PROBE_STEM = re.compile(r"^(?P<label>.+)_p\d+$")


def format_decision(decision: Decision) -> str:
    verdict = "ACCEPT" if decision.accepted else "REJECT"
    return (
        f"{verdict} dice={decision.score.dice:.6f} "
        f"matched={decision.score.matched_count} "
        f"residual_mm={decision.landmark_residual_rms:.6f}"
    )


def _read_probe(scan_path, landmarks_path, label=None) -> ProbeScan:
    return ProbeScan(
        cloud=formats.read_cloud(scan_path),
        landmarks=formats.read_landmarks(landmarks_path),
        label=label,
    )


def _threshold_override(args) -> float | None:
    """--strict forces 1.0; otherwise honor --threshold when given."""
    if getattr(args, "strict", False):
        return 1.0
    return getattr(args, "threshold", None)


# -- demo-squares -------------------------------------------------------

def cmd_demo_squares(args) -> int:
    """Two 100x100 unit squares: coincident then half-shifted, exact counts."""
    xs, ys = np.meshgrid(np.arange(100) + 0.5, np.arange(100) + 0.5)
    square = np.stack([xs.ravel(), ys.ravel(), np.full(xs.size, 0.5)], axis=1)
    base = PointCloud(square)
    shifted = PointCloud(square + np.array([50.0, 0.0, 0.0]))

    spec = GridSpec(voxel_size=1.0, origin=(0.0, 0.0, 0.0), dims=(150, 100, 1))
    grid_a = voxelize(base, spec)
    grid_b = voxelize(shifted, spec)

    coincident = similarity(grid_a, grid_a)
    half = similarity(grid_a, grid_b)

    for name, score in (("coincident", coincident), ("half-shift", half)):
        verdict = "SAME" if score.dice == 1.0 else "DIFFERENT"
        print(f"{name}: matched={score.matched_count} dice={score.dice:.3f} {verdict}")

    if args.dump_grid:
        formats.write_grid_dump(args.dump_grid, grid_a)

    exact = (
        coincident.matched_count == 20000
        and coincident.dice == 1.0
        and half.matched_count == 10000
        and half.dice == 0.5
    )
    return 0 if exact else 2


# -- gen ----------------------------------------------------------------

def cmd_gen(args) -> int:
    """Write synthetic subjects (or perturbed probes of them) as XYZ + .lmk."""
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    written = 0
    for seed in range(args.seed, args.seed + args.subjects):
        subject_id = f"s{seed:03d}"
        scan = generate_subject(
            SubjectParams(seed=seed, sample_count=args.samples), label=subject_id
        )
        if args.probes > 0:
            for k in range(1, args.probes + 1):
                probe = perturb(scan, default_probe_spec(seed, k, args.noise, args.jitter))
                _write_scan_pair(out / f"{subject_id}_p{k}", probe)
                written += 1
        else:
            if args.noise > 0 or args.jitter > 0:
                scan = perturb(scan, default_probe_spec(seed, 0, args.noise, args.jitter))
            _write_scan_pair(out / subject_id, scan)
            written += 1
    kind = "probe scans" if args.probes > 0 else "subject scans"
    print(f"wrote {written} {kind} for {args.subjects} subjects to {out}")
    return 0


def _write_scan_pair(stem: Path, scan: ProbeScan) -> None:
    formats.write_xyz(stem.with_suffix(".xyz"), scan.cloud)
    formats.write_landmarks(stem.with_suffix(".lmk"), scan.landmarks)


# -- enroll -------------------------------------------------------------

def cmd_enroll(args) -> int:
    gallery_dir = Path(args.gallery)
    if (gallery_dir / gallery_mod.MANIFEST_NAME).is_file():
        gal = gallery_mod.load(gallery_dir)
        _check_config_flags(args, gal.config)
    else:
        gal = Gallery(_config_from_flags(args))
    probe = _read_probe(args.scan, args.landmarks)
    record = gal.enroll(args.subject, probe)
    gal.save(gallery_dir)
    print(
        f"enrolled {args.subject}: points={len(record.cloud)} "
        f"occupied_voxels={record.grid.occupied}"
    )
    return 0


def _config_from_flags(args) -> MatchConfig:
    cfg = MatchConfig()
    if args.voxel_size is not None:
        cfg = replace(cfg, voxel_size=args.voxel_size)
    if args.padding is not None:
        cfg = replace(cfg, padding_voxels=args.padding)
    threshold = _threshold_override(args)
    if threshold is not None:
        cfg = replace(cfg, decision_threshold=threshold)
    if args.max_residual is not None:
        cfg = replace(cfg, max_landmark_residual=args.max_residual)
    return cfg


def _check_config_flags(args, config: MatchConfig) -> None:
    """Enrolling into an existing gallery must not contradict its config."""
    threshold = _threshold_override(args)
    mismatches = []
    if args.voxel_size is not None and args.voxel_size != config.voxel_size:
        mismatches.append(f"--voxel-size {args.voxel_size} vs gallery {config.voxel_size}")
    if args.padding is not None and args.padding != config.padding_voxels:
        mismatches.append(f"--padding {args.padding} vs gallery {config.padding_voxels}")
    if threshold is not None and threshold != config.decision_threshold:
        mismatches.append(f"--threshold {threshold} vs gallery {config.decision_threshold}")
    if args.max_residual is not None and args.max_residual != config.max_landmark_residual:
        mismatches.append(
            f"--max-residual {args.max_residual} vs gallery {config.max_landmark_residual}"
        )
    if mismatches:
        raise SkullMatchError(
            "config flags contradict the existing gallery (re-enroll to change): "
            + "; ".join(mismatches)
        )


# -- identify / verify --------------------------------------------------

def _load_gallery_for_matching(args) -> Gallery:
    gal = gallery_mod.load(args.gallery)
    threshold = _threshold_override(args)
    if threshold is not None:
        gal.config = replace(gal.config, decision_threshold=threshold)
    return gal


def cmd_identify(args) -> int:
    gal = _load_gallery_for_matching(args)
    probe = _read_probe(args.scan, args.landmarks)
    result = gal.identify(probe)
    for position, (subject_id, score) in enumerate(result.ranked, start=1):
        print(
            f"rank={position} subject={subject_id} dice={score.dice:.6f} "
            f"matched={score.matched_count}"
        )
    print(f"best_accepted={result.best_accepted or 'none'}")
    top_decision = gal.verify(result.ranked[0][0], probe)
    print(format_decision(top_decision))
    return 0 if result.best_accepted is not None else 1


def cmd_verify(args) -> int:
    gal = _load_gallery_for_matching(args)
    probe = _read_probe(args.scan, args.landmarks)
    decision = gal.verify(args.subject, probe)
    print(format_decision(decision))
    return 0 if decision.accepted else 1


# -- eval ---------------------------------------------------------------

def _parse_threshold_range(text: str) -> list[float]:
    parts = text.split(":")
    if len(parts) != 3:
        raise SkullMatchError(f"--thresholds must be a:b:step, got {text!r}")
    try:
        start, stop, step = (float(p) for p in parts)
    except ValueError:
        raise SkullMatchError(f"--thresholds must be numeric a:b:step, got {text!r}") from None
    if step <= 0 or stop < start:
        raise SkullMatchError(f"--thresholds needs step > 0 and b >= a, got {text!r}")
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    return [start + i * step for i in range(count)]


def _probe_label(stem: str) -> str:
    match = _PROBE_STEM.match(stem)
    return match.group("label") if match else stem


def load_trial_probes(trials_dir) -> list[ProbeScan]:
    """All XYZ+lmk pairs in a directory, labels taken from file stems.

    `name_p3.xyz` is probe 3 of subject `name`; a bare `name.xyz` is a
    single probe of subject `name`.
    """
    trials_dir = Path(trials_dir)
    scans = sorted(trials_dir.glob("*.xyz"))
    if not scans:
        raise SkullMatchError(f"no .xyz probe scans found in {trials_dir}")
    probes = []
    for scan_path in scans:
        lmk_path = scan_path.with_suffix(".lmk")
        if not lmk_path.is_file():
            raise SkullMatchError(f"missing landmark file {lmk_path}")
        probes.append(_read_probe(scan_path, lmk_path, label=_probe_label(scan_path.stem)))
    return probes


def cmd_eval(args) -> int:
    gal = gallery_mod.load(args.gallery)
    probes = load_trial_probes(args.trials)
    trials = [
        Trial(probe=probe, claimed_id=subject_id)
        for probe in probes
        for subject_id in gal.subject_ids
    ]
    scored = run_trials(gal, trials)
    report = sweep(scored, _parse_threshold_range(args.thresholds))
    report = report.with_rank1(rank1(gal, probes))
    if args.report:
        write_report_csv(report, args.report)
        print(f"report written to {args.report}")
    print(format_summary(report))
    return 0


# -- parser -------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="skullmatch",
        description="3D shape identification: landmark alignment + voxel matched-pixel scoring",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("demo-squares", help="reproduce the two-square matched-pixel demo")
    p.add_argument("--dump-grid", metavar="PATH", help="write the square's grid as an RLE dump")
    p.set_defaults(func=cmd_demo_squares)

    p = sub.add_parser("gen", help="generate synthetic subjects or probes")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--subjects", type=int, required=True, help="number of subjects")
    p.add_argument("--seed", type=int, default=1, help="seed of the first subject")
    p.add_argument("--noise", type=float, default=0.0, help="per-point Gaussian sigma, mm")
    p.add_argument("--jitter", type=float, default=0.0, help="landmark jitter sigma, mm")
    p.add_argument("--probes", type=int, default=0,
                   help="write this many posed probes per subject instead of clean scans")
    p.add_argument("--samples", type=int, default=SubjectParams(seed=0).sample_count,
                   help="surface points per subject")
    p.set_defaults(func=cmd_gen)

    def matching_flags(p, with_voxel=False):
        p.add_argument("--threshold", type=float, help="decision threshold (Dice)")
        p.add_argument("--strict", action="store_true",
                       help="literal exact-match rule (threshold 1.0)")
        if with_voxel:
            p.add_argument("--voxel-size", type=float, help="grid cell edge, mm")
            p.add_argument("--padding", type=int, help="grid padding, voxels")
            p.add_argument("--max-residual", type=float,
                           help="landmark residual gate, mm")

    p = sub.add_parser("enroll", help="add a subject to a gallery")
    p.add_argument("--gallery", required=True)
    p.add_argument("--subject", required=True)
    p.add_argument("--scan", required=True, help="PLY or XYZ cloud")
    p.add_argument("--landmarks", required=True, help=".lmk landmark file")
    matching_flags(p, with_voxel=True)
    p.set_defaults(func=cmd_enroll)

    p = sub.add_parser("identify", help="rank a probe against the whole gallery")
    p.add_argument("--gallery", required=True)
    p.add_argument("--scan", required=True)
    p.add_argument("--landmarks", required=True)
    matching_flags(p)
    p.set_defaults(func=cmd_identify)

    p = sub.add_parser("verify", help="check a probe against one claimed subject")
    p.add_argument("--gallery", required=True)
    p.add_argument("--subject", required=True)
    p.add_argument("--scan", required=True)
    p.add_argument("--landmarks", required=True)
    matching_flags(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("eval", help="FAR/FRR sweep over a directory of labeled probes")
    p.add_argument("--gallery", required=True)
    p.add_argument("--trials", required=True, help="directory of labeled probe scans")
    p.add_argument("--thresholds", default="0:1:0.01", help="sweep as a:b:step")
    p.add_argument("--report", help="write per-threshold CSV here")
    p.set_defaults(func=cmd_eval)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except SkullMatchError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
