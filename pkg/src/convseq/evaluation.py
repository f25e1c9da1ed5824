"""Benchmark metrics: accuracy, precision-recall, AUC-PR, PCU, timing.

Precision/recall points and the AUC integral are computed with exact
rational arithmetic and converted to float at the boundary, so degenerate
cases (all records correct) land exactly on 1.0 and reports are
bit-reproducible.
"""

from __future__ import annotations

import csv
import math
import time
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Sequence

import numpy as np

from .config import DEFAULT_T_E_MAX, PipelineConfig
from .datasetio import GroundTruth, Traverse, read_image
from .errors import EvaluationError

__all__ = [
    "MatchRecord",
    "BenchmarkReport",
    "judge",
    "accuracy",
    "pr_curve",
    "auc_pr",
    "pcu",
    "time_encoding",
    "write_pr_csv",
    "write_matches_csv",
    "render_pr_svg",
]


@dataclass(frozen=True)
class MatchRecord:
    """One query sequence's retrieved reference and confidence."""

    query_start: int
    predicted_ref: int
    score: float
    seq_len: int = 1


@dataclass(frozen=True)
class BenchmarkReport:
    """Aggregate metrics for one traverse pair."""

    accuracy: float
    pr_points: tuple[tuple[float, float], ...]
    auc_pr: float
    p_r100: float
    t_e: float
    pcu: float
    n_queries: int
    n_matched: int
    mean_seq_len: float
    t_e_seq: float
    t_e_max: float = DEFAULT_T_E_MAX

    def to_dict(self) -> dict:
        """JSON-ready dict with timing-derived fields grouped separately."""
        return {
            "accuracy": self.accuracy,
            "auc_pr": self.auc_pr,
            "p_r100": self.p_r100,
            "n_queries": self.n_queries,
            "n_matched": self.n_matched,
            "mean_seq_len": self.mean_seq_len,
            "pr_points": [[p, r] for p, r in self.pr_points],
            "timing": {
                "t_e": self.t_e,
                "t_e_seq": self.t_e_seq,
                "t_e_max": self.t_e_max,
                "pcu": self.pcu,
            },
        }


def judge(records: Sequence[MatchRecord], gt: GroundTruth) -> list[bool]:
    """A record is correct when its prediction is within the tolerance window."""
    judged = []
    for rec in records:
        if rec.query_start not in gt.mapping:
            raise EvaluationError(f"query index {rec.query_start} missing from ground truth")
        truth = gt.mapping[rec.query_start]
        judged.append(abs(rec.predicted_ref - truth) <= gt.tolerance)
    return judged


def accuracy(judged: Sequence[bool]) -> float:
    if not judged:
        raise EvaluationError("cannot compute accuracy of zero records")
    return float(Fraction(sum(judged), len(judged)))


def pr_curve(
    records: Sequence[MatchRecord], judged: Sequence[bool]
) -> list[tuple[float, float]]:
    """Sweep the confidence threshold over the distinct scores, descending.

    At each threshold, records scoring at least it are accepted; an
    accepted correct record is a true positive, an accepted incorrect one
    a false positive, and a rejected correct one a false negative.
    Precision with nothing accepted is defined as 1.
    """
    if not records:
        raise EvaluationError("cannot compute a PR curve of zero records")
    if len(records) != len(judged):
        raise EvaluationError("records and judgments differ in length")

    scores = np.array([r.score for r in records])
    correct = np.array(judged, dtype=bool)
    order = np.argsort(-scores, kind="stable")
    sorted_scores = scores[order]
    cum_correct = np.cumsum(correct[order])
    total_correct = int(cum_correct[-1])

    # Last index of each distinct-score group = the accepted set at that threshold.
    boundaries = np.flatnonzero(np.diff(sorted_scores) != 0.0)
    group_ends = np.append(boundaries, len(records) - 1)

    points = []
    for end in group_ends:
        accepted = int(end) + 1
        tp = int(cum_correct[end])
        precision = Fraction(tp, accepted) if accepted else Fraction(1)
        recall = Fraction(tp, total_correct) if total_correct else Fraction(0)
        points.append((float(precision), float(recall)))
    return points


def auc_pr(pr_points: Sequence[tuple[float, float]]) -> float:
    """Trapezoidal area of precision over recall.

    The curve is anchored by prepending the first point's precision at
    recall zero.
    """
    if not pr_points:
        raise EvaluationError("cannot integrate an empty PR curve")
    pts = [(Fraction(p), Fraction(r)) for p, r in pr_points]
    pts.insert(0, (pts[0][0], Fraction(0)))
    area = Fraction(0)
    for (p0, r0), (p1, r1) in zip(pts, pts[1:]):
        area += (r1 - r0) * (p0 + p1) / 2
    return float(area)


def pcu(p_r100: float, t_e: float, t_e_max: float = DEFAULT_T_E_MAX) -> float:
    """Precision at full recall weighted by log-relative encoding cost.

    The +9 offset keeps the technique with ``t_e == t_e_max`` at a PCU of
    exactly ``p_r100`` instead of zero.
    """
    if t_e <= 0.0 or t_e_max <= 0.0:
        raise EvaluationError("encoding times must be positive")
    return p_r100 * math.log10(t_e_max / t_e + 9.0)


def time_encoding(traverse: Traverse, cfg: PipelineConfig) -> float:
    """Mean wall-clock seconds to encode one frame, first (warm-up) frame excluded.

    Runs strictly serially; decode time is not counted.
    """
    from .pipeline import encode_query_frame

    rasters = [read_image(p) for p in traverse.frames]
    if len(rasters) == 1:
        rasters = rasters * 2
    durations = []
    for raw in rasters:
        t0 = time.perf_counter()
        encode_query_frame(raw, cfg)
        durations.append(time.perf_counter() - t0)
    return float(np.mean(durations[1:]))


def write_pr_csv(path: Path | str, pr_points: Sequence[tuple[float, float]]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["precision", "recall"])
        for p, r in pr_points:
            writer.writerow([repr(p), repr(r)])


def write_matches_csv(
    path: Path | str, records: Sequence[MatchRecord], judged: Sequence[bool] | None = None
) -> None:
    """Per-record predictions (and judgments, when available) as CSV."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        if judged is None:
            writer.writerow(["query_start", "best_ref_start", "best_score", "k"])
            for rec in records:
                writer.writerow(
                    [rec.query_start, rec.predicted_ref, repr(rec.score), rec.seq_len]
                )
        else:
            writer.writerow(["query_start", "best_ref_start", "best_score", "k", "correct"])
            for rec, ok in zip(records, judged):
                writer.writerow(
                    [rec.query_start, rec.predicted_ref, repr(rec.score), rec.seq_len, int(ok)]
                )


def render_pr_svg(pr_points: Sequence[tuple[float, float]], size: int = 480) -> str:
    """Standalone SVG of the PR curve with labelled 0-1 axes."""
    margin = 50
    span = size - 2 * margin

    def px(r: float) -> float:
        return margin + r * span

    def py(p: float) -> float:
        return size - margin - p * span

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
        f'viewBox="0 0 {size} {size}">',
        f'<rect width="{size}" height="{size}" fill="white"/>',
    ]
    for frac in (0.0, 0.25, 0.5, 0.75, 1.0):
        x, y = px(frac), py(frac)
        parts.append(
            f'<line x1="{x:.1f}" y1="{size - margin}" x2="{x:.1f}" y2="{margin}" '
            'stroke="#dddddd" stroke-width="1"/>'
        )
        parts.append(
            f'<line x1="{margin}" y1="{y:.1f}" x2="{size - margin}" y2="{y:.1f}" '
            'stroke="#dddddd" stroke-width="1"/>'
        )
        parts.append(
            f'<text x="{x:.1f}" y="{size - margin + 18}" font-size="11" '
            f'text-anchor="middle">{frac:g}</text>'
        )
        parts.append(
            f'<text x="{margin - 8}" y="{y + 4:.1f}" font-size="11" '
            f'text-anchor="end">{frac:g}</text>'
        )
    parts.append(
        f'<line x1="{margin}" y1="{size - margin}" x2="{size - margin}" '
        f'y2="{size - margin}" stroke="black" stroke-width="1.5"/>'
    )
    parts.append(
        f'<line x1="{margin}" y1="{size - margin}" x2="{margin}" y2="{margin}" '
        'stroke="black" stroke-width="1.5"/>'
    )
    parts.append(
        f'<text x="{size / 2:.0f}" y="{size - 12}" font-size="13" '
        'text-anchor="middle">Recall</text>'
    )
    parts.append(
        f'<text x="14" y="{size / 2:.0f}" font-size="13" text-anchor="middle" '
        f'transform="rotate(-90 14 {size / 2:.0f})">Precision</text>'
    )
    if pr_points:
        coords = " ".join(f"{px(r):.2f},{py(p):.2f}" for p, r in pr_points)
        parts.append(
            f'<polyline points="{coords}" fill="none" stroke="#1f6fb2" stroke-width="2"/>'
        )
    parts.append("</svg>")
    return "\n".join(parts)
