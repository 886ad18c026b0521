"""Dataset and ground-truth loading, likelihood scoring, candidate generation.

The likelihood scorer here is token Jaccard over the concatenated attribute
values.  It is deliberately replaceable (``generate_candidates`` accepts any
scorer): candidate likelihoods normally come from whatever matcher the
surrounding pipeline trusts, and everything downstream only needs a number
in [0, 1] per pair.
"""

from __future__ import annotations

import csv
import json
import re
from collections import Counter
from dataclasses import dataclass
from typing import Callable, Iterable

from .core import ObjectId, Pair
from .ordering import GroundTruth

DEFAULT_RECORD_CAP = 5000

# lowercase, then split on whitespace and ASCII punctuation
_TOKEN_SPLIT = re.compile(r"[\s!\"#$%&'()*+,\-./:;<=>?@\[\\\]^_`{|}~]+")


class DatasetError(ValueError):
    """Malformed dataset or truth file."""


@dataclass(frozen=True)
class ObjectRecord:
    id: ObjectId
    attributes: tuple[tuple[str, str], ...]

    @property
    def values(self) -> tuple[str, ...]:
        return tuple(v for _, v in self.attributes)

    @property
    def text(self) -> str:
        return " ".join(self.values)


@dataclass
class Dataset:
    """One record collection, or two for a bipartite (cross-table) join."""

    records: list[ObjectRecord]
    records_b: list[ObjectRecord] | None = None

    @property
    def two_table(self) -> bool:
        return self.records_b is not None

    def all_records(self) -> list[ObjectRecord]:
        return self.records + (self.records_b or [])


@dataclass
class CandidateSet:
    pairs: list[Pair]
    threshold: float


def tokenize(text: str) -> frozenset[str]:
    return frozenset(t for t in _TOKEN_SPLIT.split(text.lower()) if t)


def record_tokens(record: ObjectRecord) -> frozenset[str]:
    return tokenize(record.text)


def jaccard_likelihood(a: ObjectRecord, b: ObjectRecord) -> float:
    """|A ∩ B| / |A ∪ B| over attribute-value tokens; 0.0 when both empty."""
    ta, tb = record_tokens(a), record_tokens(b)
    union = ta | tb
    if not union:
        return 0.0
    return len(ta & tb) / len(union)


def load_csv(path) -> Dataset:
    """Read one record per row; header row required, first column ``id``."""
    records: list[ObjectRecord] = []
    seen: set[str] = set()
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DatasetError(f"{path}: empty file, expected a header row") from None
        if not header or header[0].strip() != "id":
            raise DatasetError(f"{path}: first header column must be 'id', got {header[:1]!r}")
        attr_names = [h.strip() for h in header[1:]]
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != len(header):
                raise DatasetError(
                    f"{path}:{lineno}: expected {len(header)} columns, got {len(row)}"
                )
            rid = row[0].strip()
            if not rid:
                raise DatasetError(f"{path}:{lineno}: empty record id")
            if rid in seen:
                raise DatasetError(f"{path}:{lineno}: duplicate record id {rid!r}")
            seen.add(rid)
            records.append(
                ObjectRecord(id=rid, attributes=tuple(zip(attr_names, row[1:])))
            )
    return Dataset(records=records)


def load_truth(path) -> GroundTruth:
    """Read (object_id, cluster_id) rows; header row required."""
    cluster_of: dict[ObjectId, str] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DatasetError(f"{path}: empty file, expected a header row") from None
        if len(header) < 2:
            raise DatasetError(f"{path}: expected columns (object_id, cluster_id)")
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) < 2:
                raise DatasetError(f"{path}:{lineno}: expected 2 columns, got {len(row)}")
            oid = row[0].strip()
            if oid in cluster_of:
                raise DatasetError(f"{path}:{lineno}: duplicate object id {oid!r}")
            cluster_of[oid] = row[1].strip()
    return GroundTruth(cluster_of=cluster_of)


def unknown_objects(truth: GroundTruth, dataset: Dataset) -> list[str]:
    """Truth entries that reference no dataset record (warn, don't fail)."""
    known = {r.id for r in dataset.all_records()}
    return sorted(set(truth.cluster_of) - known)


def pair_id_for(a: ObjectId, b: ObjectId) -> str:
    left, right = (a, b) if a <= b else (b, a)
    return f"{left}|{right}"


def generate_candidates(
    dataset: Dataset,
    threshold: float,
    scorer: Callable[[ObjectRecord, ObjectRecord], float] = jaccard_likelihood,
    record_cap: int = DEFAULT_RECORD_CAP,
) -> CandidateSet:
    """All pairs scoring at least ``threshold``, in deterministic id order.

    One-table datasets yield unordered within-collection pairs; two-table
    datasets yield cross-collection pairs only.  Quadratic, so the record
    count is capped.
    """
    if not 0.0 <= threshold <= 1.0:
        raise ValueError(f"threshold {threshold} outside [0, 1]")
    total = len(dataset.all_records())
    if total > record_cap:
        raise ValueError(
            f"{total} records exceeds the all-pairs cap of {record_cap}; "
            "pre-block the dataset or raise record_cap explicitly"
        )
    if dataset.two_table:
        combos: Iterable[tuple[ObjectRecord, ObjectRecord]] = (
            (a, b) for a in dataset.records for b in dataset.records_b  # type: ignore[union-attr]
        )
    else:
        rec = dataset.records
        combos = ((rec[i], rec[j]) for i in range(len(rec)) for j in range(i + 1, len(rec)))
    pairs: list[Pair] = []
    for a, b in combos:
        score = scorer(a, b)
        if score >= threshold:
            pairs.append(
                Pair(pair_id=pair_id_for(a.id, b.id), left=a.id, right=b.id, likelihood=score)
            )
    pairs.sort(key=lambda p: (p.left, p.right))
    return CandidateSet(pairs=pairs, threshold=threshold)


def cluster_size_distribution(truth: GroundTruth) -> dict[int, int]:
    """cluster size -> number of clusters of that size (singletons included)."""
    members = Counter(truth.cluster_of.values())
    return dict(Counter(members.values()))


def write_candidates_jsonl(path, pairs: Iterable[Pair]) -> None:
    """One JSON object per pair: {pair_id, left, right, likelihood}."""
    with open(path, "w", encoding="utf-8") as fh:
        for p in pairs:
            fh.write(
                json.dumps(
                    {
                        "pair_id": p.pair_id,
                        "left": p.left,
                        "right": p.right,
                        "likelihood": p.likelihood,
                    },
                    sort_keys=True,
                )
                + "\n"
            )


def load_candidates_jsonl(path) -> list[Pair]:
    pairs: list[Pair] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
                pairs.append(
                    Pair(
                        pair_id=obj["pair_id"],
                        left=obj["left"],
                        right=obj["right"],
                        likelihood=float(obj.get("likelihood", 0.5)),
                    )
                )
            except (KeyError, TypeError, ValueError, json.JSONDecodeError) as exc:
                raise DatasetError(f"{path}:{lineno}: bad candidate line ({exc})") from exc
    return pairs
