"""The JSON run-report schema shared by the CLI and the labeling service.

Reports are versioned and serialized with sorted keys so that identical runs
produce byte-identical files.
"""

from __future__ import annotations

import json
from typing import Any, Mapping, Sequence

from .core import Pair
from .labeling import LabelingResult
from .metrics import QualityMetrics, SavingsReport, savings

REPORT_VERSION = 1


def savings_dict(report: SavingsReport) -> dict[str, Any]:
    return {
        "total_pairs": report.total_pairs,
        "crowdsourced": report.crowdsourced,
        "deduced": report.deduced,
        "conflicts": report.conflicts,
        "iteration_sizes": list(report.iteration_sizes),
    }


def quality_dict(quality: QualityMetrics | None) -> dict[str, Any] | None:
    if quality is None:
        return None
    return {
        "tp": quality.tp,
        "fp": quality.fp,
        "fn": quality.fn,
        "precision": quality.precision,
        "recall": quality.recall,
        "f_measure": quality.f_measure,
    }


def build_report(
    spec: Mapping[str, Any],
    result: LabelingResult,
    pairs: Sequence[Pair],
    quality: QualityMetrics | None = None,
) -> dict[str, Any]:
    by_id = {p.pair_id: p for p in pairs}
    labels = [
        {
            "pair_id": pid,
            "left": by_id[pid].left,
            "right": by_id[pid].right,
            "label": lp.label.value,
            "source": lp.source.value,
        }
        for pid, lp in sorted(result.labels.items())
    ]
    iterations = [
        {
            "iteration": r.iteration,
            "published": list(r.published),
            "crowd_labeled": [[pid, label.value] for pid, label in r.crowd_labeled],
            "deduced": [[pid, label.value] for pid, label in r.deduced],
            "conflicts": r.conflicts,
        }
        for r in result.iterations
    ]
    return {
        "version": REPORT_VERSION,
        "spec": dict(spec),
        "savings": savings_dict(savings(result)),
        "quality": quality_dict(quality),
        "iterations": iterations,
        "labels": labels,
    }


def dumps_report(report: Mapping[str, Any]) -> str:
    return json.dumps(report, sort_keys=True, indent=2) + "\n"


def write_report(path, report: Mapping[str, Any]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps_report(report))


def load_report(path) -> dict[str, Any]:
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def crowdsourced_ids(report: Mapping[str, Any]) -> frozenset[str]:
    return frozenset(l["pair_id"] for l in report["labels"] if l["source"] == "crowd")


def deduced_ids(report: Mapping[str, Any]) -> frozenset[str]:
    return frozenset(l["pair_id"] for l in report["labels"] if l["source"] == "deduced")
