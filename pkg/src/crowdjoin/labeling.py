"""Labeling engines: one-pair-at-a-time, and parallel batch publication.

The parallel engine repeatedly identifies every pair that must be
crowdsourced no matter how the still-unlabeled pairs turn out (by presuming
them all matching), publishes that set at once, folds the answers back in,
and deduces whatever became implied.  Instant decision re-runs the
publication scan after every single answer instead of waiting for the whole
batch; non-matching-first consumes the published queue in ascending
likelihood order, since only non-matching answers can unlock new
publications.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Mapping, Sequence

from .core import (
    ClusterGraph,
    DeduceResult,
    InsertOutcome,
    Label,
    LabeledPair,
    LabelSource,
    Pair,
)
from .ordering import LabelingOrder, check_permutation, index_pairs


class PairStatus(Enum):
    UNLABELED = "unlabeled"
    PUBLISHED = "published"
    LABELED = "labeled"


@dataclass
class PairState:
    """Lifecycle of one pair.  Legal transitions: UNLABELED -> PUBLISHED,
    PUBLISHED -> LABELED (crowd), UNLABELED -> LABELED (deduced)."""

    status: PairStatus = PairStatus.UNLABELED
    label: Label | None = None
    source: LabelSource | None = None

    def publish(self) -> None:
        if self.status is not PairStatus.UNLABELED:
            raise ValueError(f"cannot publish a pair in state {self.status.value}")
        self.status = PairStatus.PUBLISHED

    def label_from_crowd(self, label: Label) -> None:
        if self.status is not PairStatus.PUBLISHED:
            raise ValueError(f"crowd label arrived for a pair in state {self.status.value}")
        self.status = PairStatus.LABELED
        self.label = label
        self.source = LabelSource.CROWD

    def label_by_deduction(self, label: Label) -> None:
        if self.status is not PairStatus.UNLABELED:
            raise ValueError(f"cannot deduce a pair in state {self.status.value}")
        self.status = PairStatus.LABELED
        self.label = label
        self.source = LabelSource.DEDUCED


class EngineMode(Enum):
    SEQUENTIAL = "sequential"
    PARALLEL = "parallel"


@dataclass(frozen=True)
class EngineConfig:
    """Engine flags.  nonmatching_first orders the simulated answer stream by
    ascending likelihood; without instant_decision it cannot change which
    pairs are crowdsourced, only the order answers are recorded in."""

    mode: EngineMode = EngineMode.PARALLEL
    instant_decision: bool = False
    nonmatching_first: bool = False
    seed: int = 0


@dataclass
class IterationReport:
    """What one engine iteration did.  Publication happens before the
    iteration's crowd labels are collected."""

    iteration: int
    published: list[str] = field(default_factory=list)
    crowd_labeled: list[tuple[str, Label]] = field(default_factory=list)
    deduced: list[tuple[str, Label]] = field(default_factory=list)
    conflicts: int = 0


@dataclass
class LabelingResult:
    labels: dict[str, LabeledPair]
    iterations: list[IterationReport]
    crowdsourced_count: int
    deduced_count: int

    @property
    def crowdsourced_ids(self) -> frozenset[str]:
        return frozenset(
            pid for pid, lp in self.labels.items() if lp.source is LabelSource.CROWD
        )

    @property
    def deduced_ids(self) -> frozenset[str]:
        return frozenset(
            pid for pid, lp in self.labels.items() if lp.source is LabelSource.DEDUCED
        )

    @property
    def conflicts(self) -> int:
        return sum(r.conflicts for r in self.iterations)


def _finish(labels: dict[str, LabeledPair], reports: list[IterationReport]) -> LabelingResult:
    crowd = sum(1 for lp in labels.values() if lp.source is LabelSource.CROWD)
    return LabelingResult(
        labels=labels,
        iterations=reports,
        crowdsourced_count=crowd,
        deduced_count=len(labels) - crowd,
    )


def sequential_label(order: LabelingOrder, pairs: Sequence[Pair], crowd) -> LabelingResult:
    """Label pairs strictly in order; ask the crowd only when deduction fails.

    One IterationReport per crowd question; pairs deduced between questions
    are attributed to the preceding question's report.
    """
    by_id = index_pairs(pairs)
    check_permutation(order, by_id)
    graph = ClusterGraph()
    labels: dict[str, LabeledPair] = {}
    reports: list[IterationReport] = []
    current: IterationReport | None = None
    for pid in order:
        p = by_id[pid]
        deduction = graph.deduce(p.left, p.right)
        if deduction is not DeduceResult.UNDEDUCED:
            label = deduction.as_label()
            labels[pid] = LabeledPair(p, label, LabelSource.DEDUCED)
            graph.insert(p.left, p.right, label)
            assert current is not None  # the first pair is never deducible
            current.deduced.append((pid, label))
        else:
            label = crowd.answer(p)
            outcome = graph.insert(p.left, p.right, label)
            current = IterationReport(
                iteration=len(reports) + 1,
                published=[pid],
                crowd_labeled=[(pid, label)],
                conflicts=1 if outcome is InsertOutcome.CONFLICT else 0,
            )
            reports.append(current)
            labels[pid] = LabeledPair(p, label, LabelSource.CROWD)
    return _finish(labels, reports)


def parallel_crowdsourced_pairs(
    order: LabelingOrder,
    pairs: Sequence[Pair],
    labeled: Mapping[str, Label] | Iterable[LabeledPair],
) -> list[str]:
    """Pairs that must be crowdsourced whatever the unlabeled ones turn out
    to be, in order.

    Scans the order over a fresh graph: labeled pairs enter with their label;
    an unlabeled pair is emitted iff it is currently undeducible, and is then
    merged in as if matching.  The presumed-matching merge is unconditional
    (it lower-bounds the non-matching count on every path), so an edge
    between the merged clusters is swallowed rather than treated as a
    conflict.
    """
    if not isinstance(labeled, Mapping):
        labeled = {lp.pair.pair_id: lp.label for lp in labeled}
    by_id = index_pairs(pairs)
    check_permutation(order, by_id)
    graph = ClusterGraph()
    publish: list[str] = []
    for pid in order:
        p = by_id[pid]
        if pid in labeled:
            graph.insert(p.left, p.right, labeled[pid])
        else:
            if graph.deduce(p.left, p.right) is DeduceResult.UNDEDUCED:
                publish.append(pid)
            graph.merge_unchecked(p.left, p.right)
    return publish


def deduce_all(
    order: LabelingOrder,
    pairs: Sequence[Pair],
    labeled: Mapping[str, Label] | Iterable[LabeledPair],
    exclude: frozenset[str] | set[str] = frozenset(),
) -> list[tuple[str, Label]]:
    """Labels deducible from the labeled set, to fixpoint.

    ``exclude`` holds pairs that must stay open (published, awaiting a crowd
    answer).  Contradictions in the labeled set resolve first-write-wins in
    order position; they do not abort deduction.
    """
    if not isinstance(labeled, Mapping):
        labeled = {lp.pair.pair_id: lp.label for lp in labeled}
    by_id = index_pairs(pairs)
    check_permutation(order, by_id)
    graph = ClusterGraph()
    for pid in order:
        if pid in labeled:
            p = by_id[pid]
            graph.insert(p.left, p.right, labeled[pid])
    known = set(labeled)
    deduced: list[tuple[str, Label]] = []
    changed = True
    while changed:
        changed = False
        for pid in order:
            if pid in known or pid in exclude:
                continue
            p = by_id[pid]
            result = graph.deduce(p.left, p.right)
            if result is DeduceResult.UNDEDUCED:
                continue
            label = result.as_label()
            graph.insert(p.left, p.right, label)
            deduced.append((pid, label))
            known.add(pid)
            changed = True
    return deduced


def parallel_label(
    order: LabelingOrder,
    pairs: Sequence[Pair],
    crowd,
    config: EngineConfig,
    arrival_order: Sequence[str] | None = None,
) -> LabelingResult:
    """Iterate publish -> collect answers -> deduce until everything is labeled.

    Without instant decision each iteration waits for all published answers.
    With it, exactly one answer is consumed per iteration and the publication
    scan re-runs immediately, so pairs unlocked by a non-matching answer are
    published without waiting for the rest of the batch.

    ``arrival_order`` overrides the simulated answer arrival sequence (used
    to replay recorded sessions); by default arrival is seeded-random, or
    ascending-likelihood under nonmatching_first.
    """
    if config.mode is not EngineMode.PARALLEL:
        raise ValueError("parallel_label requires mode=PARALLEL")
    by_id = index_pairs(pairs)
    check_permutation(order, by_id)
    rng = random.Random(config.seed)
    arrival_pos = {pid: i for i, pid in enumerate(arrival_order)} if arrival_order else None

    graph = ClusterGraph()
    states = {pid: PairState() for pid in order}
    labels: dict[str, LabeledPair] = {}
    label_values: dict[str, Label] = {}
    published: set[str] = set()
    pending: list[str] = []
    reports: list[IterationReport] = []

    def pick_next() -> str:
        if config.nonmatching_first:
            chosen = min(pending, key=lambda pid: (by_id[pid].likelihood, pid))
        elif arrival_pos is not None:
            chosen = min(pending, key=lambda pid: arrival_pos[pid])
        else:
            chosen = pending[rng.randrange(len(pending))]
        pending.remove(chosen)
        return chosen

    def apply_answer(pid: str, report: IterationReport) -> None:
        p = by_id[pid]
        label = crowd.answer(p)
        if graph.insert(p.left, p.right, label) is InsertOutcome.CONFLICT:
            report.conflicts += 1
        states[pid].label_from_crowd(label)
        labels[pid] = LabeledPair(p, label, LabelSource.CROWD)
        label_values[pid] = label
        report.crowd_labeled.append((pid, label))

    def deduce_open(report: IterationReport) -> None:
        # the live graph already encodes every consequence, so one pass over
        # the open pairs reaches the fixpoint
        for pid in order:
            if states[pid].status is not PairStatus.UNLABELED:
                continue
            p = by_id[pid]
            result = graph.deduce(p.left, p.right)
            if result is DeduceResult.UNDEDUCED:
                continue
            label = result.as_label()
            graph.insert(p.left, p.right, label)
            states[pid].label_by_deduction(label)
            labels[pid] = LabeledPair(p, label, LabelSource.DEDUCED)
            label_values[pid] = label
            report.deduced.append((pid, label))

    while len(labels) < len(by_id):
        report = IterationReport(iteration=len(reports) + 1)
        newly = [
            pid
            for pid in parallel_crowdsourced_pairs(order, pairs, label_values)
            if pid not in published
        ]
        for pid in newly:
            states[pid].publish()
            published.add(pid)
            pending.append(pid)
        report.published = newly
        if not pending:
            raise RuntimeError("engine stalled: nothing published and nothing pending")
        if config.instant_decision:
            apply_answer(pick_next(), report)
        else:
            while pending:
                apply_answer(pick_next(), report)
        deduce_open(report)
        reports.append(report)
    return _finish(labels, reports)


def label_pairs(
    order: LabelingOrder,
    pairs: Sequence[Pair],
    crowd,
    config: EngineConfig,
) -> LabelingResult:
    """Dispatch to the engine selected by config.mode."""
    if config.mode is EngineMode.SEQUENTIAL:
        return sequential_label(order, pairs, crowd)
    return parallel_label(order, pairs, crowd, config)
