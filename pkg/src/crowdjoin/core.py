"""Object pairs, labels, and the cluster graph used for transitive deduction.

Matching objects collapse into clusters (union-find); non-matching evidence
becomes edges between cluster representatives.  A pair is then deducible as
matching iff both objects share a cluster, as non-matching iff their clusters
are joined by an edge, and is otherwise undeduced.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Iterator, Mapping

ObjectId = str


class Label(Enum):
    MATCHING = "matching"
    NON_MATCHING = "non-matching"

    def flipped(self) -> "Label":
        return Label.NON_MATCHING if self is Label.MATCHING else Label.MATCHING


class LabelSource(Enum):
    CROWD = "crowd"
    DEDUCED = "deduced"


class DeduceResult(Enum):
    MATCHING = "matching"
    NON_MATCHING = "non-matching"
    UNDEDUCED = "undeduced"

    def as_label(self) -> Label:
        if self is DeduceResult.UNDEDUCED:
            raise ValueError("undeduced result carries no label")
        return Label(self.value)


class InsertOutcome(Enum):
    APPLIED = "applied"
    REDUNDANT = "redundant"
    CONFLICT = "conflict"


class SizeLimitError(RuntimeError):
    """Raised when the brute-force oracle is asked about too many objects."""


@dataclass(frozen=True)
class Pair:
    """An unordered candidate pair with a match likelihood in [0, 1].

    (a, b) and (b, a) denote the same pair; the stored orientation is
    canonical (left < right).
    """

    pair_id: str
    left: ObjectId
    right: ObjectId
    likelihood: float = 0.5

    def __post_init__(self):
        if self.left == self.right:
            raise ValueError(f"pair {self.pair_id!r} relates {self.left!r} to itself")
        if not 0.0 <= self.likelihood <= 1.0:
            raise ValueError(f"pair {self.pair_id!r} likelihood {self.likelihood} outside [0, 1]")
        if self.right < self.left:
            lo, hi = self.right, self.left
            object.__setattr__(self, "left", lo)
            object.__setattr__(self, "right", hi)

    @property
    def objects(self) -> tuple[ObjectId, ObjectId]:
        return (self.left, self.right)


@dataclass(frozen=True)
class LabeledPair:
    pair: Pair
    label: Label
    source: LabelSource


class ClusterGraph:
    """Union-find over objects plus non-matching edges between cluster roots.

    Single-writer: callers must not mutate concurrently (``find`` counts as a
    mutation because of path compression, though cluster membership and edges
    never change under it).
    """

    def __init__(self, objects: Iterable[ObjectId] = ()):
        self._parent: dict[ObjectId, ObjectId] = {}
        self._size: dict[ObjectId, int] = {}
        self._edges: dict[ObjectId, set[ObjectId]] = {}
        for o in objects:
            self.add_object(o)

    def add_object(self, o: ObjectId) -> None:
        if o not in self._parent:
            self._parent[o] = o
            self._size[o] = 1
            self._edges[o] = set()

    def __contains__(self, o: ObjectId) -> bool:
        return o in self._parent

    def objects(self) -> Iterator[ObjectId]:
        return iter(self._parent)

    def find(self, o: ObjectId) -> ObjectId:
        """Root of o's cluster; unknown objects register as singletons."""
        self.add_object(o)
        root = o
        while self._parent[root] != root:
            root = self._parent[root]
        while self._parent[o] != root:  # path compression
            self._parent[o], o = root, self._parent[o]
        return root

    def cluster_count(self) -> int:
        return len(self._size)

    def clusters(self) -> dict[ObjectId, set[ObjectId]]:
        """Current partition, keyed by representative."""
        out: dict[ObjectId, set[ObjectId]] = {root: set() for root in self._size}
        for o in self._parent:
            out[self.find(o)].add(o)
        return out

    def edge_count(self) -> int:
        return sum(len(v) for v in self._edges.values()) // 2

    def has_edge(self, a: ObjectId, b: ObjectId) -> bool:
        """Whether the clusters of a and b are joined by a non-matching edge."""
        return self.find(b) in self._edges[self.find(a)]

    def neighbors(self, o: ObjectId) -> frozenset[ObjectId]:
        return frozenset(self._edges[self.find(o)])

    def deduce(self, a: ObjectId, b: ObjectId) -> DeduceResult:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return DeduceResult.MATCHING
        if rb in self._edges[ra]:
            return DeduceResult.NON_MATCHING
        return DeduceResult.UNDEDUCED

    def insert(self, a: ObjectId, b: ObjectId, label: Label) -> InsertOutcome:
        """Record a labeled pair; first write wins.

        A matching insert between edge-joined clusters, or a non-matching
        insert inside one cluster, contradicts the graph's existing deduction
        and is rejected as CONFLICT (graph unchanged).
        """
        ra, rb = self.find(a), self.find(b)
        if label is Label.MATCHING:
            if ra == rb:
                return InsertOutcome.REDUNDANT
            if rb in self._edges[ra]:
                return InsertOutcome.CONFLICT
            self._union(ra, rb)
            return InsertOutcome.APPLIED
        if ra == rb:
            return InsertOutcome.CONFLICT
        if rb in self._edges[ra]:
            return InsertOutcome.REDUNDANT
        self._edges[ra].add(rb)
        self._edges[rb].add(ra)
        return InsertOutcome.APPLIED

    def merge_unchecked(self, a: ObjectId, b: ObjectId) -> None:
        """Union the clusters of a and b even if an edge joins them.

        A direct edge between the two clusters is discarded.  This is the
        presume-matching update used by publication scans, where unlabeled
        pairs are treated as matching to lower-bound deducibility; it is not
        a labeled insert and bypasses conflict detection.
        """
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self._union(ra, rb)

    def _union(self, ra: ObjectId, rb: ObjectId) -> None:
        # union by size; equal sizes keep the lexicographically smaller root
        if self._size[ra] < self._size[rb] or (
            self._size[ra] == self._size[rb] and rb < ra
        ):
            ra, rb = rb, ra
        self._parent[rb] = ra
        self._size[ra] += self._size.pop(rb)
        # re-home rb's edges onto the survivor; a direct ra-rb edge would be a
        # self-loop and is dropped
        for other in self._edges.pop(rb):
            self._edges[other].discard(rb)
            if other != ra:
                self._edges[other].add(ra)
                self._edges[ra].add(other)

    def copy(self) -> "ClusterGraph":
        g = ClusterGraph()
        g._parent = dict(self._parent)
        g._size = dict(self._size)
        g._edges = {k: set(v) for k, v in self._edges.items()}
        return g

    def validate(self) -> None:
        """Check structural invariants; raises AssertionError on violation."""
        for o in self._parent:
            seen = set()
            while self._parent[o] != o:
                assert o not in seen, "parent links form a cycle"
                seen.add(o)
                o = self._parent[o]
        roots = {o for o in self._parent if self._parent[o] == o}
        assert roots == set(self._size), "size table out of sync with roots"
        assert roots == set(self._edges), "edge table keyed by non-roots"
        sizes = {root: 0 for root in roots}
        for o in self._parent:
            sizes[self.find(o)] += 1
        assert sizes == self._size, "cluster sizes out of sync"
        for a, nbrs in self._edges.items():
            assert a not in nbrs, f"self-loop on {a!r}"
            for b in nbrs:
                assert b in self._edges, f"edge endpoint {b!r} is not a root"
                assert a in self._edges[b], f"edge {a!r}-{b!r} not symmetric"


def new_cluster_graph(objects: Iterable[ObjectId] = ()) -> ClusterGraph:
    return ClusterGraph(objects)


def insert_labeled(graph: ClusterGraph, pair: Pair, label: Label) -> InsertOutcome:
    return graph.insert(pair.left, pair.right, label)


def deduce_label(pair: Pair, graph: ClusterGraph) -> DeduceResult:
    """Deduce pair's label from the graph; UNDEDUCED when neither rule fires."""
    return graph.deduce(pair.left, pair.right)


def build_cluster_graph(labeled: Iterable[LabeledPair]) -> ClusterGraph:
    """Insert every labeled pair (first write wins on contradictions)."""
    graph = ClusterGraph()
    for lp in labeled:
        graph.insert(lp.pair.left, lp.pair.right, lp.label)
    return graph


def brute_force_deduce(
    pair: Pair,
    labeled: Iterable[LabeledPair],
    max_objects: int = 12,
) -> DeduceResult:
    """Deduce by enumerating simple paths in the labeled-pair graph.

    MATCHING if some path between the endpoints uses only matching pairs,
    NON_MATCHING if some path contains exactly one non-matching pair,
    UNDEDUCED otherwise.  Test oracle only: cost is exponential, so the
    object count is capped (SizeLimitError beyond ``max_objects``).
    Assumes the labeled set is internally consistent.
    """
    adjacency: dict[ObjectId, list[tuple[ObjectId, Label]]] = {}
    for lp in labeled:
        adjacency.setdefault(lp.pair.left, []).append((lp.pair.right, lp.label))
        adjacency.setdefault(lp.pair.right, []).append((lp.pair.left, lp.label))
    objects = set(adjacency) | {pair.left, pair.right}
    if len(objects) > max_objects:
        raise SizeLimitError(
            f"{len(objects)} objects exceeds the brute-force cap of {max_objects}"
        )

    source, target = pair.left, pair.right
    found = {0: False, 1: False}

    def walk(node: ObjectId, non_matching: int, visited: set[ObjectId]) -> None:
        if found[0]:
            return
        for nbr, label in adjacency.get(node, ()):
            if nbr in visited:
                continue
            count = non_matching + (1 if label is Label.NON_MATCHING else 0)
            if count > 1:  # paths with >1 non-matching pair deduce nothing
                continue
            if nbr == target:
                found[count] = True
                if found[0]:
                    return
                continue
            visited.add(nbr)
            walk(nbr, count, visited)
            visited.remove(nbr)

    walk(source, 0, {source})
    if found[0]:
        return DeduceResult.MATCHING
    if found[1]:
        return DeduceResult.NON_MATCHING
    return DeduceResult.UNDEDUCED


def assignment_consistent(pairs: Iterable[Pair], assignment: Mapping[str, Label]) -> bool:
    """True iff the full label assignment contains no contradiction.

    Equivalent to: no cycle in the pair graph carries exactly one
    non-matching label.  Insertion order does not matter.
    """
    graph = ClusterGraph()
    for p in pairs:
        outcome = graph.insert(p.left, p.right, assignment[p.pair_id])
        if outcome is InsertOutcome.CONFLICT:
            return False
    return True
