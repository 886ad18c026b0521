"""Labeling orders and their exact / expected crowdsourced-pair counts.

The order in which candidate pairs are considered determines how many must
be asked of the crowd: pairs deducible from earlier labels cost nothing.
With ground truth available, putting all matching pairs first is optimal;
without it, sorting by descending match likelihood is the practical
heuristic (exact minimization of the expectation is intractable).
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Callable, Iterable, Mapping, Sequence

from .core import (
    ClusterGraph,
    DeduceResult,
    InsertOutcome,
    Label,
    ObjectId,
    Pair,
)

DEFAULT_WORLD_CAP = 20


class MissingTruthError(KeyError):
    """An object has no entity-cluster assignment in the ground truth."""


class EnumerationCapError(ValueError):
    """Too many pairs for exhaustive world enumeration."""


@dataclass(frozen=True)
class GroundTruth:
    """Entity-cluster id per object; induces a label for every pair."""

    cluster_of: Mapping[ObjectId, str]

    def label_of(self, a: ObjectId, b: ObjectId) -> Label:
        try:
            ca, cb = self.cluster_of[a], self.cluster_of[b]
        except KeyError as exc:
            raise MissingTruthError(f"object {exc.args[0]!r} has no ground-truth cluster") from exc
        return Label.MATCHING if ca == cb else Label.NON_MATCHING

    def pair_label(self, pair: Pair) -> Label:
        return self.label_of(pair.left, pair.right)


@dataclass(frozen=True)
class LabelingOrder:
    """A permutation of the candidate pair ids."""

    sequence: tuple[str, ...]

    def __iter__(self):
        return iter(self.sequence)

    def __len__(self) -> int:
        return len(self.sequence)


@dataclass(frozen=True)
class CrowdsourcedCount:
    count: int
    crowdsourced_ids: frozenset[str]
    deduced_ids: frozenset[str]


@dataclass(frozen=True)
class World:
    """One transitively consistent full label assignment."""

    assignment: Mapping[str, Label]
    probability: float


def index_pairs(pairs: Iterable[Pair]) -> dict[str, Pair]:
    by_id: dict[str, Pair] = {}
    for p in pairs:
        if p.pair_id in by_id:
            raise ValueError(f"duplicate pair id {p.pair_id!r}")
        by_id[p.pair_id] = p
    return by_id


def check_permutation(order: LabelingOrder, by_id: Mapping[str, Pair]) -> None:
    if len(order.sequence) != len(set(order.sequence)) or set(order.sequence) != set(by_id):
        raise ValueError("order is not a permutation of the candidate pairs")


def oracle_optimal_order(pairs: Sequence[Pair], truth: GroundTruth) -> LabelingOrder:
    """All truly matching pairs first, then non-matching; id-ascending within
    each block (any within-block order gives the same count)."""
    matching, nonmatching = [], []
    for p in pairs:
        (matching if truth.pair_label(p) is Label.MATCHING else nonmatching).append(p.pair_id)
    return LabelingOrder(tuple(sorted(matching) + sorted(nonmatching)))


def oracle_worst_order(pairs: Sequence[Pair], truth: GroundTruth) -> LabelingOrder:
    """Mirror of the optimal order: non-matching pairs first."""
    matching, nonmatching = [], []
    for p in pairs:
        (matching if truth.pair_label(p) is Label.MATCHING else nonmatching).append(p.pair_id)
    return LabelingOrder(tuple(sorted(nonmatching) + sorted(matching)))


def heuristic_order(pairs: Sequence[Pair]) -> LabelingOrder:
    """Descending likelihood; ties broken by pair id ascending."""
    ranked = sorted(pairs, key=lambda p: (-p.likelihood, p.pair_id))
    return LabelingOrder(tuple(p.pair_id for p in ranked))


def random_order(pairs: Sequence[Pair], seed: int) -> LabelingOrder:
    ids = sorted(p.pair_id for p in pairs)
    random.Random(seed).shuffle(ids)
    return LabelingOrder(tuple(ids))


def simulate_order(
    order: LabelingOrder,
    by_id: Mapping[str, Pair],
    label_of: Callable[[Pair], Label],
) -> tuple[list[str], list[str]]:
    """Sequential pass: each pair is deduced if possible, else counted as
    crowdsourced; either way its label enters the graph.  Returns
    (crowdsourced ids, deduced ids) in processing order."""
    graph = ClusterGraph()
    crowdsourced: list[str] = []
    deduced: list[str] = []
    for pid in order:
        p = by_id[pid]
        if graph.deduce(p.left, p.right) is DeduceResult.UNDEDUCED:
            crowdsourced.append(pid)
        else:
            deduced.append(pid)
        graph.insert(p.left, p.right, label_of(p))
    return crowdsourced, deduced


def crowdsourced_count(
    order: LabelingOrder,
    pairs: Sequence[Pair],
    truth: GroundTruth,
) -> CrowdsourcedCount:
    by_id = index_pairs(pairs)
    check_permutation(order, by_id)
    crowd, deduced = simulate_order(order, by_id, truth.pair_label)
    return CrowdsourcedCount(
        count=len(crowd),
        crowdsourced_ids=frozenset(crowd),
        deduced_ids=frozenset(deduced),
    )


def enumerate_consistent_worlds(
    pairs: Sequence[Pair],
    cap: int = DEFAULT_WORLD_CAP,
) -> list[World]:
    """All transitively consistent label assignments with probabilities.

    Each pair contributes its likelihood (matching) or one minus it
    (non-matching) to the product; probabilities are renormalized over the
    consistent assignments.  Inconsistent prefixes are pruned, since adding
    labels never removes a contradiction.
    """
    pairs = list(pairs)
    index_pairs(pairs)
    if len(pairs) > cap:
        raise EnumerationCapError(f"{len(pairs)} pairs exceeds the enumeration cap of {cap}")

    results: list[tuple[dict[str, Label], float]] = []

    def extend(i: int, graph: ClusterGraph, weight: float, assignment: dict[str, Label]) -> None:
        if i == len(pairs):
            results.append((dict(assignment), weight))
            return
        p = pairs[i]
        for label in (Label.MATCHING, Label.NON_MATCHING):
            branch = graph.copy()
            if branch.insert(p.left, p.right, label) is InsertOutcome.CONFLICT:
                continue
            factor = p.likelihood if label is Label.MATCHING else 1.0 - p.likelihood
            assignment[p.pair_id] = label
            extend(i + 1, branch, weight * factor, assignment)
            del assignment[p.pair_id]

    extend(0, ClusterGraph(), 1.0, {})
    total = sum(w for _, w in results)
    if total <= 0.0:
        raise ValueError("likelihoods place zero probability on every consistent assignment")
    return [World(assignment=a, probability=w / total) for a, w in results]


def expected_crowdsourced_count(
    order: LabelingOrder,
    pairs: Sequence[Pair],
    cap: int = DEFAULT_WORLD_CAP,
) -> float:
    """Sum over pairs of the probability each one must be crowdsourced.

    Computed exactly: run the sequential pass under every consistent world
    and weight the resulting counts by world probability.
    """
    by_id = index_pairs(pairs)
    check_permutation(order, by_id)
    expected = 0.0
    for world in enumerate_consistent_worlds(pairs, cap=cap):
        crowd, _ = simulate_order(order, by_id, lambda p: world.assignment[p.pair_id])
        expected += world.probability * len(crowd)
    return expected
