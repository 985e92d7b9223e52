"""Error-rate evaluation: trial scoring, FAR/FRR sweeps, EER, rank-1.

Conventions: a trial is accepted at threshold t iff dice >= t (ties accept,
so t = 1.0 reproduces the strict exact-equality rule instead of rejecting
perfect matches). FAR is the accepted fraction of impostor trials, FRR the
rejected fraction of genuine trials; both are exact step functions of the
threshold, and the EER is read off the sweep by linear interpolation
between the two adjacent thresholds where FAR and FRR cross.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import NoGenuineTrials, NoImpostorTrials, UnknownSubject
from .gallery import Gallery
from .matcher import ProbeScan
from .voxel import MatchScore

HISTOGRAM_BINS = 20


@dataclass(frozen=True, eq=False)
class Trial:
    """One claimed-identity attempt with ground truth attached.

    genuine is derived: true iff the probe's label equals the claimed id.
    """

    probe: ProbeScan
    claimed_id: str
    genuine: bool = field(init=False)

    def __post_init__(self):
        if self.probe.label is None:
            raise ValueError("trial probes need a ground-truth label")
        object.__setattr__(self, "genuine", self.probe.label == self.claimed_id)


@dataclass(frozen=True)
class ThresholdRow:
    threshold: float
    far: float
    frr: float
    genuine_accepts: int
    impostor_accepts: int


@dataclass(frozen=True)
class EvalReport:
    """Sweep output plus population summaries.

    rank1_accuracy is None unless the caller also ran an identification
    pass (sweeps alone cannot compute it).
    """

    rows: tuple[ThresholdRow, ...]
    eer: float
    eer_threshold: float
    genuine_count: int
    impostor_count: int
    genuine_hist: tuple[int, ...]
    impostor_hist: tuple[int, ...]
    hist_edges: tuple[float, ...]
    rank1_accuracy: float | None = None

    def with_rank1(self, value: float) -> "EvalReport":
        return replace(self, rank1_accuracy=value)


def run_trials(gallery: Gallery, trials: list[Trial]) -> list[tuple[Trial, MatchScore]]:
    """Score every trial by 1:1 verification, preserving order."""
    scored: list[tuple[Trial, MatchScore]] = []
    for index, trial in enumerate(trials):
        try:
            decision = gallery.verify(trial.claimed_id, trial.probe)
        except UnknownSubject as exc:
            raise UnknownSubject(f"trial {index}: {exc}") from None
        scored.append((trial, decision.score))
    return scored


def _accept_counts(sorted_scores: np.ndarray, thresholds: np.ndarray) -> np.ndarray:
    """Number of scores >= each threshold (accept-on-tie)."""
    return sorted_scores.size - np.searchsorted(sorted_scores, thresholds, side="left")


def sweep(scored: list[tuple[Trial, MatchScore]], thresholds) -> EvalReport:
    """FAR/FRR across a threshold grid, with interpolated EER.

    Thresholds are sorted and deduplicated. If the grid does not bracket
    the FAR/FRR crossing, the EER falls back to the midpoint (far+frr)/2 at
    the nearest grid end.
    """
    genuine = np.sort([score.dice for trial, score in scored if trial.genuine])
    impostor = np.sort([score.dice for trial, score in scored if not trial.genuine])
    if genuine.size == 0:
        raise NoGenuineTrials("sweep needs at least one genuine trial, got none")
    if impostor.size == 0:
        raise NoImpostorTrials("sweep needs at least one impostor trial, got none")

    grid = np.unique(np.asarray(list(thresholds), dtype=np.float64))
    if grid.size == 0:
        raise ValueError("threshold grid is empty")
    if not np.isfinite(grid).all():
        raise ValueError("thresholds must be finite")

    genuine_accepts = _accept_counts(genuine, grid)
    impostor_accepts = _accept_counts(impostor, grid)
    far = impostor_accepts / impostor.size
    frr = (genuine.size - genuine_accepts) / genuine.size

    eer, eer_threshold = _interpolate_eer(grid, far, frr)

    edges = np.linspace(0.0, 1.0, HISTOGRAM_BINS + 1)
    genuine_hist, _ = np.histogram(genuine, bins=edges)
    impostor_hist, _ = np.histogram(impostor, bins=edges)

    rows = tuple(
        ThresholdRow(
            threshold=float(t),
            far=float(fa),
            frr=float(fr),
            genuine_accepts=int(ga),
            impostor_accepts=int(ia),
        )
        for t, fa, fr, ga, ia in zip(grid, far, frr, genuine_accepts, impostor_accepts)
    )
    return EvalReport(
        rows=rows,
        eer=eer,
        eer_threshold=eer_threshold,
        genuine_count=int(genuine.size),
        impostor_count=int(impostor.size),
        genuine_hist=tuple(int(c) for c in genuine_hist),
        impostor_hist=tuple(int(c) for c in impostor_hist),
        hist_edges=tuple(float(e) for e in edges),
    )


def _interpolate_eer(grid: np.ndarray, far: np.ndarray, frr: np.ndarray) -> tuple[float, float]:
    diff = far - frr  # non-increasing in the threshold
    crossing = np.flatnonzero(diff <= 0)
    if crossing.size == 0:
        return float((far[-1] + frr[-1]) / 2.0), float(grid[-1])
    hi = int(crossing[0])
    if diff[hi] == 0.0 or hi == 0:
        return float((far[hi] + frr[hi]) / 2.0), float(grid[hi])
    lo = hi - 1
    frac = diff[lo] / (diff[lo] - diff[hi])
    eer = far[lo] + frac * (far[hi] - far[lo])
    threshold = grid[lo] + frac * (grid[hi] - grid[lo])
    return float(eer), float(threshold)


def rank1(gallery: Gallery, probes: list[ProbeScan]) -> float:
    """Fraction of labeled probes whose top-ranked subject is the true one."""
    if not probes:
        raise ValueError("rank1 needs at least one probe")
    hits = 0
    for probe in probes:
        if probe.label is None:
            raise ValueError("rank1 probes need a ground-truth label")
        result = gallery.identify(probe)
        hits += result.ranked[0][0] == probe.label
    return hits / len(probes)


def write_report_csv(report: EvalReport, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["threshold", "far", "frr", "genuine_accepts", "impostor_accepts"])
        for row in report.rows:
            writer.writerow(
                [repr(row.threshold), repr(row.far), repr(row.frr),
                 row.genuine_accepts, row.impostor_accepts]
            )


def format_summary(report: EvalReport) -> str:
    lines = [
        f"genuine trials:   {report.genuine_count}",
        f"impostor trials:  {report.impostor_count}",
        f"eer:              {report.eer:.6f}",
        f"eer_threshold:    {report.eer_threshold:.6f}",
    ]
    if report.rank1_accuracy is not None:
        lines.append(f"rank1_accuracy:   {report.rank1_accuracy:.6f}")
    return "\n".join(lines)
