"""Seeded synthetic truths and candidate sets for simulation experiments.

Cluster sizes are drawn heavy-tailed (a few large entities, many singletons),
which is where transitive deduction pays off.  Candidate likelihoods are
drawn from overlapping ranges for matching and non-matching pairs, so
likelihood ordering is informative but imperfect.
"""

from __future__ import annotations

import random
from itertools import combinations

from .core import Pair
from .ordering import GroundTruth


def skewed_truth(n_objects: int, seed: int, alpha: float = 1.1) -> GroundTruth:
    """Partition n_objects into Pareto-sized entity clusters."""
    rng = random.Random(seed)
    cluster_of: dict[str, str] = {}
    width = len(str(max(n_objects - 1, 1)))
    remaining = n_objects
    index = 0
    cluster = 0
    while remaining:
        size = min(remaining, max(1, int(rng.paretovariate(alpha))))
        for _ in range(size):
            cluster_of[f"o{index:0{width}d}"] = f"e{cluster}"
            index += 1
        cluster += 1
        remaining -= size
    return GroundTruth(cluster_of=cluster_of)


def synthetic_candidates(
    truth: GroundTruth,
    seed: int,
    cross_per_cluster_pair: int = 12,
    min_cross_cluster_size: int = 3,
    singleton_cross: int = 0,
    match_range: tuple[float, float] = (0.40, 1.0),
    nonmatch_range: tuple[float, float] = (0.0, 0.60),
) -> list[Pair]:
    """Candidate pairs: every within-cluster pair, plus cross-cluster pairs
    sampled densely between the larger clusters (parallel non-matching edges
    are what make bad orders expensive)."""
    rng = random.Random(seed)
    members: dict[str, list[str]] = {}
    for obj, cluster in sorted(truth.cluster_of.items()):
        members.setdefault(cluster, []).append(obj)

    chosen: dict[tuple[str, str], float] = {}
    for group in members.values():
        for a, b in combinations(group, 2):
            chosen[(a, b)] = rng.uniform(*match_range)

    big = sorted(
        (c for c, objs in members.items() if len(objs) >= min_cross_cluster_size),
        key=lambda c: (-len(members[c]), c),
    )
    for ca, cb in combinations(big, 2):
        cross = [(min(a, b), max(a, b)) for a in members[ca] for b in members[cb]]
        rng.shuffle(cross)
        for key in cross[:cross_per_cluster_pair]:
            chosen[key] = rng.uniform(*nonmatch_range)
    if singleton_cross:
        everyone = sorted(truth.cluster_of)
        added = 0
        while added < singleton_cross:
            a, b = rng.sample(everyone, 2)
            key = (min(a, b), max(a, b))
            if key in chosen or truth.label_of(a, b).value == "matching":
                continue
            chosen[key] = rng.uniform(*nonmatch_range)
            added += 1

    return [
        Pair(pair_id=f"{a}|{b}", left=a, right=b, likelihood=lik)
        for (a, b), lik in sorted(chosen.items())
    ]


def synthetic_instance(
    n_objects: int,
    seed: int,
    **candidate_kwargs,
) -> tuple[list[Pair], GroundTruth]:
    truth = skewed_truth(n_objects, seed)
    pairs = synthetic_candidates(truth, seed + 1, **candidate_kwargs)
    return pairs, truth
