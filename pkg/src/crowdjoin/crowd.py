"""Crowd answer sources: truthful oracle, noisy workers, votes, HIT batching.

Engines only need ``answer(pair) -> Label``; everything else here supports
replication (several workers per pair, resolved by majority vote) and the
grouping of pairs into HITs the way a real platform would present them.
"""

from __future__ import annotations

import random
from collections import Counter
from dataclasses import dataclass, field
from typing import Protocol, Sequence

from .core import Label, Pair
from .ordering import GroundTruth


class DuplicateAnswerError(ValueError):
    """A (pair, worker) combination was answered twice."""


class CrowdBackend(Protocol):
    """Answer source contract: every asked pair gets exactly one final label."""

    synchronous: bool
    supports_reorder: bool

    def answer(self, pair: Pair) -> Label: ...


@dataclass(frozen=True)
class NoiseModel:
    """Independent per-(pair, worker) answer flips at a fixed error rate."""

    error_rate: float
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.error_rate <= 1.0:
            raise ValueError(f"error_rate {self.error_rate} outside [0, 1]")


def truth_answer(pair: Pair, truth: GroundTruth) -> Label:
    return truth.pair_label(pair)


def noisy_answer(pair: Pair, truth: GroundTruth, noise: NoiseModel, worker_id: str) -> Label:
    """Truthful label, flipped with probability error_rate.

    The flip decision is a deterministic function of (seed, pair, worker),
    so identical configurations replay identical answer streams.
    """
    label = truth.pair_label(pair)
    stream = random.Random(f"{noise.seed}|{pair.pair_id}|{worker_id}")
    if stream.random() < noise.error_rate:
        return label.flipped()
    return label


def majority_vote(answers: Sequence[Label]) -> Label:
    """Most frequent label; ties resolve to NON_MATCHING.

    The conservative tie rule: a wrong merge propagates through positive
    transitivity, a wrong split does not.
    """
    if not answers:
        raise ValueError("majority_vote needs at least one answer")
    counts = Counter(answers)
    if counts[Label.MATCHING] > counts[Label.NON_MATCHING]:
        return Label.MATCHING
    return Label.NON_MATCHING


@dataclass
class Hit:
    """A batch of pairs for workers, replicated ``replicas`` times each."""

    hit_id: str
    pair_ids: list[str]
    replicas: int = 1
    answers: dict[tuple[str, str], Label] = field(default_factory=dict)

    def record_answer(self, worker_id: str, pair_id: str, label: Label) -> None:
        if pair_id not in self.pair_ids:
            raise KeyError(f"pair {pair_id!r} is not in HIT {self.hit_id!r}")
        key = (pair_id, worker_id)
        if key in self.answers:
            raise DuplicateAnswerError(f"worker {worker_id!r} already answered {pair_id!r}")
        if len(self.answers_for(pair_id)) >= self.replicas:
            raise DuplicateAnswerError(f"pair {pair_id!r} already has {self.replicas} answers")
        self.answers[key] = label

    def answers_for(self, pair_id: str) -> list[Label]:
        return [label for (pid, _), label in self.answers.items() if pid == pair_id]

    def has_quorum(self, pair_id: str) -> bool:
        return len(self.answers_for(pair_id)) >= self.replicas

    def final_label(self, pair_id: str) -> Label:
        votes = self.answers_for(pair_id)
        if len(votes) < self.replicas:
            raise ValueError(f"pair {pair_id!r} has {len(votes)}/{self.replicas} answers")
        return majority_vote(votes)

    def pairs_open_for(self, worker_id: str) -> list[str]:
        """Pairs this worker may still answer (not theirs yet, quorum not met)."""
        return [
            pid
            for pid in self.pair_ids
            if (pid, worker_id) not in self.answers and not self.has_quorum(pid)
        ]

    def is_complete(self) -> bool:
        return all(self.has_quorum(pid) for pid in self.pair_ids)


def batch_into_hits(
    pair_ids: Sequence[str],
    batch_size: int,
    replicas: int,
    start_index: int = 0,
) -> list[Hit]:
    """Consecutive chunks of at most batch_size pairs; the tail may be short."""
    if batch_size < 1:
        raise ValueError("batch_size must be >= 1")
    if replicas < 1:
        raise ValueError("replicas must be >= 1")
    hits = []
    for offset in range(0, len(pair_ids), batch_size):
        chunk = list(pair_ids[offset : offset + batch_size])
        hits.append(Hit(hit_id=f"h{start_index + len(hits)}", pair_ids=chunk, replicas=replicas))
    return hits


class TruthfulCrowd:
    """Always answers with the ground-truth label."""

    synchronous = True
    supports_reorder = True

    def __init__(self, truth: GroundTruth):
        self.truth = truth

    def answer(self, pair: Pair) -> Label:
        return truth_answer(pair, self.truth)


class NoisyCrowd:
    """Replicated noisy workers resolved by majority vote per pair."""

    synchronous = True
    supports_reorder = True

    def __init__(self, truth: GroundTruth, noise: NoiseModel, replicas: int = 1):
        if replicas < 1:
            raise ValueError("replicas must be >= 1")
        self.truth = truth
        self.noise = noise
        self.replicas = replicas

    def answer(self, pair: Pair) -> Label:
        votes = [
            noisy_answer(pair, self.truth, self.noise, f"w{k}") for k in range(self.replicas)
        ]
        return majority_vote(votes)


class ScriptedCrowd:
    """Answers straight from a fixed pair-id -> label table (session replays)."""

    synchronous = True
    supports_reorder = True

    def __init__(self, table: dict[str, Label]):
        self.table = dict(table)

    def answer(self, pair: Pair) -> Label:
        return self.table[pair.pair_id]
