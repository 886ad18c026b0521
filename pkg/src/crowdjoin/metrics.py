"""Quality (precision/recall/F) and savings accounting for labeling runs."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

from .core import Label, Pair
from .labeling import LabelingResult
from .ordering import GroundTruth


@dataclass(frozen=True)
class QualityMetrics:
    tp: int
    fp: int
    fn: int
    precision: float
    recall: float
    f_measure: float

    @classmethod
    def from_counts(cls, tp: int, fp: int, fn: int) -> "QualityMetrics":
        # empty-denominator convention: a vacuous claim is perfectly correct
        precision = tp / (tp + fp) if tp + fp else 1.0
        recall = tp / (tp + fn) if tp + fn else 1.0
        f = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
        return cls(tp=tp, fp=fp, fn=fn, precision=precision, recall=recall, f_measure=f)


@dataclass(frozen=True)
class SavingsReport:
    total_pairs: int
    crowdsourced: int
    deduced: int
    conflicts: int
    iteration_sizes: tuple[int, ...]


def evaluate(
    labels: Mapping[str, Label],
    pairs: Sequence[Pair],
    truth: GroundTruth,
) -> QualityMetrics:
    """Score output labels against ground truth over the matching class."""
    tp = fp = fn = 0
    for pair in pairs:
        actual = truth.pair_label(pair)
        predicted = labels[pair.pair_id]
        if predicted is Label.MATCHING:
            if actual is Label.MATCHING:
                tp += 1
            else:
                fp += 1
        elif actual is Label.MATCHING:
            fn += 1
    return QualityMetrics.from_counts(tp, fp, fn)


def result_labels(result: LabelingResult) -> dict[str, Label]:
    return {pid: lp.label for pid, lp in result.labels.items()}


def savings(result: LabelingResult) -> SavingsReport:
    """Tally crowd questions vs free deductions, per run and per iteration.

    iteration_sizes lists the size of every nonempty publication batch.
    """
    return SavingsReport(
        total_pairs=len(result.labels),
        crowdsourced=result.crowdsourced_count,
        deduced=result.deduced_count,
        conflicts=result.conflicts,
        iteration_sizes=tuple(
            len(r.published) for r in result.iterations if r.published
        ),
    )
