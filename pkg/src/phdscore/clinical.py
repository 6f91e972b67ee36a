"""Ranking validation of difficulty scores against clinical labels.

The score table orders phonemes from most to least difficult; a
clinical report says which phonemes actually are difficult. Sweeping a
descending score threshold yields a precision-recall curve whose
average precision (step-wise, non-interpolated) summarizes how well
the ranking separates the classes. Tied scores form a single step:
phonemes sharing a score enter the confusion counts together, so the
curve never depends on an arbitrary ordering within a tie.

Higher score = predicted difficult. Phonemes the report labels but the
scores do not cover are skipped and counted; coverage problems are the
caller's signal, not a hard error.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Mapping

from .errors import DegenerateLabels
from .manifest import ClinicalReport


@dataclass(frozen=True)
class PRCurve:
    points: tuple[tuple[float, float], ...]  # (recall, precision) per step
    thresholds: tuple[float, ...]
    average_precision: float
    positives: int
    negatives: int
    skipped: int


@dataclass(frozen=True)
class SourceComparison:
    """Paired evaluation of two score sources against one report."""

    first: PRCurve
    second: PRCurve
    ap_difference: float


def pr_curve(
    scores: Mapping[str, float],
    report: ClinicalReport,
    severity_threshold: int | None = None,
) -> PRCurve:
    """Precision-recall curve of a score map against a clinical report."""
    labels = report.binary_labels(severity_threshold)
    skipped = sorted(sym for sym in labels if sym not in scores)
    if skipped:
        warnings.warn(
            f"report {report.report_id!r}: {len(skipped)} labeled phonemes"
            f" have no score and were skipped: {' '.join(skipped)}"
        )
    evaluated = [(scores[sym], labels[sym], sym) for sym in labels if sym in scores]
    positives = sum(1 for _, difficult, _ in evaluated if difficult)
    negatives = len(evaluated) - positives
    if positives == 0 or negatives == 0:
        raise DegenerateLabels(
            f"report {report.report_id!r} has {positives} positives and"
            f" {negatives} negatives among scored phonemes"
        )
    # group by descending score; ties share one threshold step
    evaluated.sort(key=lambda item: (-item[0], item[2]))
    points: list[tuple[float, float]] = []
    thresholds: list[float] = []
    ap = 0.0
    tp = 0
    seen = 0
    prev_recall = 0.0
    i = 0
    while i < len(evaluated):
        threshold = evaluated[i][0]
        j = i
        while j < len(evaluated) and evaluated[j][0] == threshold:
            if evaluated[j][1]:
                tp += 1
            seen += 1
            j += 1
        recall = tp / positives
        precision = tp / seen
        points.append((recall, precision))
        thresholds.append(threshold)
        ap += (recall - prev_recall) * precision
        prev_recall = recall
        i = j
    return PRCurve(
        points=tuple(points),
        thresholds=tuple(thresholds),
        average_precision=ap,
        positives=positives,
        negatives=negatives,
        skipped=len(skipped),
    )


def compare_sources(
    scores_first: Mapping[str, float],
    scores_second: Mapping[str, float],
    report: ClinicalReport,
    severity_threshold: int | None = None,
) -> SourceComparison:
    """Evaluate two score sources against the same report.

    Typical use: scores from a pre-adaptation backend vs scores from a
    personalized one. The operation reports the AP difference
    (first minus second) and applies no judgment threshold itself.
    """
    first = pr_curve(scores_first, report, severity_threshold)
    second = pr_curve(scores_second, report, severity_threshold)
    return SourceComparison(
        first=first,
        second=second,
        ap_difference=first.average_precision - second.average_precision,
    )


def summary_line(curve: PRCurve) -> str:
    return (
        f"AP={curve.average_precision:.4f}"
        f" positives={curve.positives}"
        f" negatives={curve.negatives}"
        f" skipped={curve.skipped}"
    )


def serialize_pr_curve(curve: PRCurve) -> str:
    """CSV rendering: threshold,recall,precision rows plus an AP line."""
    lines = ["threshold,recall,precision"]
    for threshold, (recall, precision) in zip(curve.thresholds, curve.points):
        lines.append(f"{threshold!r},{recall!r},{precision!r}")
    lines.append(f"# {summary_line(curve)}")
    return "\n".join(lines) + "\n"


def pr_curve_svg(curve: PRCurve, size: int = 320) -> str:
    """Static SVG rendering of the curve on unit axes."""
    margin = 40
    span = size - 2 * margin

    def x(recall: float) -> float:
        return margin + recall * span

    def y(precision: float) -> float:
        return margin + (1.0 - precision) * span

    coords = " ".join(f"{x(r):.1f},{y(p):.1f}" for r, p in curve.points)
    ticks = []
    for t in (0.0, 0.5, 1.0):
        ticks.append(
            f'<text x="{x(t):.1f}" y="{size - margin + 16}" font-size="10"'
            f' text-anchor="middle">{t:.1f}</text>'
        )
        ticks.append(
            f'<text x="{margin - 6}" y="{y(t):.1f}" font-size="10"'
            f' text-anchor="end" dominant-baseline="middle">{t:.1f}</text>'
        )
    return (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}"'
        f' viewBox="0 0 {size} {size}">\n'
        f'<rect width="{size}" height="{size}" fill="white"/>\n'
        f'<rect x="{margin}" y="{margin}" width="{span}" height="{span}"'
        f' fill="none" stroke="black"/>\n'
        f'<polyline points="{coords}" fill="none" stroke="crimson" stroke-width="1.5"/>\n'
        + "\n".join(ticks)
        + f'\n<text x="{size / 2:.0f}" y="{size - 8}" font-size="11"'
        f' text-anchor="middle">recall</text>\n'
        f'<text x="12" y="{size / 2:.0f}" font-size="11" text-anchor="middle"'
        f' transform="rotate(-90 12 {size / 2:.0f})">precision</text>\n'
        f'<text x="{size / 2:.0f}" y="{margin - 10}" font-size="11"'
        f' text-anchor="middle">AP = {curve.average_precision:.4f}</text>\n'
        "</svg>\n"
    )
