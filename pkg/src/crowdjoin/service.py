"""HTTP labeling service: published pairs become HITs answered by workers.

Each session wraps an answer-driven parallel engine.  Worker answers
accumulate per (pair, worker); when a pair reaches its replica quorum the
majority label is final, the engine folds it in, deduces whatever follows,
and (under instant decision) immediately publishes and batches any pair that
the answer unlocked.  Every raw answer is appended to a per-session JSONL
log, so a crashed session can be reconstructed by replay.
"""

from __future__ import annotations

import json
import random
import threading
import time
import uuid
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from fastapi import FastAPI, HTTPException, Response
from pydantic import BaseModel, Field

from .core import ClusterGraph, DeduceResult, InsertOutcome, Label, LabeledPair, LabelSource, Pair
from .crowd import DuplicateAnswerError, Hit, batch_into_hits
from .labeling import (
    IterationReport,
    LabelingResult,
    PairState,
    PairStatus,
    parallel_crowdsourced_pairs,
)
from .ordering import LabelingOrder, heuristic_order, index_pairs
from .report import build_report


class CandidateIn(BaseModel):
    pair_id: str
    left: str
    right: str
    likelihood: float = 0.5


class QualificationPairIn(BaseModel):
    left: str
    right: str
    label: str  # "matching" | "non-matching"


class SessionConfigIn(BaseModel):
    batch_size: int = Field(default=20, ge=1)
    replicas: int = Field(default=1, ge=1)
    instant_decision: bool = True
    nonmatching_first: bool = False
    seed: int = 0
    order: list[str] | None = None  # explicit pair-id order; default heuristic
    qualification: list[QualificationPairIn] | None = None


class CreateSessionRequest(BaseModel):
    candidates: list[CandidateIn]
    config: SessionConfigIn = Field(default_factory=SessionConfigIn)
    records: dict[str, dict[str, str]] | None = None


class AnswerRequest(BaseModel):
    worker: str
    pair_id: str
    label: str


class QualificationAnswerRequest(BaseModel):
    worker: str
    answers: list[str]


def _parse_label(text: str) -> Label:
    try:
        return Label(text)
    except ValueError:
        raise HTTPException(422, f"label must be 'matching' or 'non-matching', got {text!r}")


class SessionEngine:
    """Answer-driven parallel engine with the same report structure as the
    offline instant-decision engine: publications triggered by one answer are
    reported in the next answer's IterationReport."""

    def __init__(self, order: LabelingOrder, pairs: list[Pair], instant_decision: bool):
        self.order = order
        self.pairs = pairs
        self.by_id = index_pairs(pairs)
        self.instant_decision = instant_decision
        self.graph = ClusterGraph()
        self.states = {pid: PairState() for pid in order}
        self.labels: dict[str, LabeledPair] = {}
        self.label_values: dict[str, Label] = {}
        self.published: set[str] = set()
        self.pending: set[str] = set()
        self.reports: list[IterationReport] = []
        self.publish_buffer: list[str] = []
        self._publish(self._scan())

    def _scan(self) -> list[str]:
        return [
            pid
            for pid in parallel_crowdsourced_pairs(self.order, self.pairs, self.label_values)
            if pid not in self.published
        ]

    def _publish(self, pids: list[str]) -> list[str]:
        for pid in pids:
            self.states[pid].publish()
            self.published.add(pid)
            self.pending.add(pid)
        self.publish_buffer.extend(pids)
        return pids

    def _deduce_open(self, report: IterationReport) -> None:
        for pid in self.order:
            if self.states[pid].status is not PairStatus.UNLABELED:
                continue
            p = self.by_id[pid]
            result = self.graph.deduce(p.left, p.right)
            if result is DeduceResult.UNDEDUCED:
                continue
            label = result.as_label()
            self.graph.insert(p.left, p.right, label)
            self.states[pid].label_by_deduction(label)
            self.labels[pid] = LabeledPair(p, label, LabelSource.DEDUCED)
            self.label_values[pid] = label
            report.deduced.append((pid, label))

    def apply_final_label(self, pid: str, label: Label) -> tuple[IterationReport, list[str]]:
        """Fold one finalized pair label in; returns the iteration report and
        the pairs newly published as a consequence."""
        if pid not in self.pending:
            raise ValueError(f"pair {pid!r} is not awaiting an answer")
        report = IterationReport(
            iteration=len(self.reports) + 1, published=list(self.publish_buffer)
        )
        self.publish_buffer.clear()
        p = self.by_id[pid]
        if self.graph.insert(p.left, p.right, label) is InsertOutcome.CONFLICT:
            report.conflicts += 1
        self.pending.discard(pid)
        self.states[pid].label_from_crowd(label)
        self.labels[pid] = LabeledPair(p, label, LabelSource.CROWD)
        self.label_values[pid] = label
        report.crowd_labeled.append((pid, label))
        if self.instant_decision:
            self._deduce_open(report)
            newly = self._publish(self._scan())
        elif not self.pending:
            self._deduce_open(report)
            newly = self._publish(self._scan())
        else:
            newly = []
        self.reports.append(report)
        return report, newly

    def is_complete(self) -> bool:
        return len(self.labels) == len(self.by_id)

    def result(self) -> LabelingResult:
        crowd = sum(1 for lp in self.labels.values() if lp.source is LabelSource.CROWD)
        return LabelingResult(
            labels=dict(self.labels),
            iterations=list(self.reports),
            crowdsourced_count=crowd,
            deduced_count=len(self.labels) - crowd,
        )


@dataclass
class Session:
    session_id: str
    engine: SessionEngine
    config: SessionConfigIn
    records: dict[str, dict[str, str]]
    log_path: Path
    hits: dict[str, Hit] = field(default_factory=dict)
    hit_of_pair: dict[str, str] = field(default_factory=dict)
    qualified: set[str] = field(default_factory=set)
    rng: random.Random = field(default_factory=random.Random)
    lock: threading.RLock = field(default_factory=threading.RLock)

    def add_hits(self, pair_ids: list[str]) -> list[Hit]:
        batches = batch_into_hits(
            pair_ids,
            batch_size=self.config.batch_size,
            replicas=self.config.replicas,
            start_index=len(self.hits),
        )
        for hit in batches:
            self.hits[hit.hit_id] = hit
            for pid in hit.pair_ids:
                self.hit_of_pair[pid] = hit.hit_id
        return batches

    def open_hits(self) -> list[Hit]:
        return [h for h in self.hits.values() if not h.is_complete()]

    def next_hit_for(self, worker: str) -> Hit | None:
        eligible = [h for h in self.open_hits() if h.pairs_open_for(worker)]
        if not eligible:
            return None
        if self.config.nonmatching_first:
            # most-unlikely-matching work first: only non-matching answers
            # unlock further publications
            return min(
                eligible,
                key=lambda h: (
                    max(self.engine.by_id[pid].likelihood for pid in h.pair_ids),
                    h.hit_id,
                ),
            )
        return eligible[self.rng.randrange(len(eligible))]

    def log_answer(self, worker: str, pair_id: str, label: Label) -> None:
        entry = {"ts": time.time(), "worker": worker, "pair_id": pair_id, "label": label.value}
        with open(self.log_path, "a", encoding="utf-8") as fh:
            fh.write(json.dumps(entry, sort_keys=True) + "\n")

    def hit_view(self, hit: Hit, worker: str) -> dict[str, Any]:
        return {
            "hit_id": hit.hit_id,
            "replicas": hit.replicas,
            "pairs": [
                {
                    "pair_id": pid,
                    "left": self.engine.by_id[pid].left,
                    "right": self.engine.by_id[pid].right,
                    "left_record": self.records.get(self.engine.by_id[pid].left, {}),
                    "right_record": self.records.get(self.engine.by_id[pid].right, {}),
                }
                for pid in hit.pair_ids
            ],
            "answered": sorted(
                pid for pid in hit.pair_ids if (pid, worker) in hit.answers
            ),
            "open": sorted(hit.pairs_open_for(worker)),
        }


class SessionStore:
    def __init__(self, sessions_dir: Path):
        self.sessions_dir = sessions_dir
        self.sessions: dict[str, Session] = {}
        self.lock = threading.Lock()

    def create(self, request: CreateSessionRequest) -> Session:
        pairs = [
            Pair(c.pair_id, c.left, c.right, c.likelihood) for c in request.candidates
        ]
        by_id = index_pairs(pairs)
        if request.config.order is not None:
            order = LabelingOrder(tuple(request.config.order))
            if set(order.sequence) != set(by_id) or len(order) != len(by_id):
                raise ValueError("config.order is not a permutation of the candidates")
        else:
            order = heuristic_order(pairs)
        engine = SessionEngine(order, pairs, request.config.instant_decision)
        session_id = uuid.uuid4().hex[:12]
        session = Session(
            session_id=session_id,
            engine=engine,
            config=request.config,
            records=request.records or {},
            log_path=self.sessions_dir / f"{session_id}.jsonl",
            rng=random.Random(request.config.seed),
        )
        session.add_hits(list(engine.publish_buffer))
        with self.lock:
            self.sessions[session_id] = session
        return session

    def get(self, session_id: str) -> Session:
        with self.lock:
            session = self.sessions.get(session_id)
        if session is None:
            raise HTTPException(404, f"unknown session {session_id!r}")
        return session


def create_app(sessions_dir: str | Path | None = None) -> FastAPI:
    directory = Path(sessions_dir) if sessions_dir else Path("sessions")
    directory.mkdir(parents=True, exist_ok=True)
    app = FastAPI(title="crowdjoin labeling service")
    store = SessionStore(directory)
    app.state.store = store

    @app.post("/api/sessions")
    def create_session(request: CreateSessionRequest) -> dict[str, Any]:
        try:
            session = store.create(request)
        except ValueError as exc:
            raise HTTPException(400, str(exc))
        with session.lock:
            return {
                "session_id": session.session_id,
                "published": sorted(session.engine.published),
                "open_hits": len(session.open_hits()),
                "complete": session.engine.is_complete(),
            }

    @app.get("/api/sessions/{session_id}/hits/next")
    def next_hit(session_id: str, worker: str) -> Any:
        session = store.get(session_id)
        with session.lock:
            if session.config.qualification and worker not in session.qualified:
                raise HTTPException(403, "worker must pass the qualification test first")
            hit = session.next_hit_for(worker)
            if hit is None:
                return Response(status_code=204)
            return session.hit_view(hit, worker)

    @app.get("/api/sessions/{session_id}/qualification")
    def get_qualification(session_id: str) -> dict[str, Any]:
        session = store.get(session_id)
        quiz = session.config.qualification or []
        return {
            "pairs": [
                {"index": i, "left": q.left, "right": q.right} for i, q in enumerate(quiz)
            ]
        }

    @app.post("/api/sessions/{session_id}/qualification")
    def post_qualification(session_id: str, request: QualificationAnswerRequest) -> dict[str, Any]:
        session = store.get(session_id)
        quiz = session.config.qualification or []
        if not quiz:
            with session.lock:
                session.qualified.add(request.worker)
            return {"passed": True}
        if len(request.answers) != len(quiz):
            raise HTTPException(422, f"expected {len(quiz)} answers")
        passed = all(
            _parse_label(answer) is Label(q.label)
            for answer, q in zip(request.answers, quiz)
        )
        with session.lock:
            if passed:
                session.qualified.add(request.worker)
            else:
                session.qualified.discard(request.worker)
        return {"passed": passed}

    @app.post("/api/sessions/{session_id}/hits/{hit_id}/answers")
    def post_answer(session_id: str, hit_id: str, request: AnswerRequest) -> dict[str, Any]:
        session = store.get(session_id)
        label = _parse_label(request.label)
        with session.lock:
            if session.config.qualification and request.worker not in session.qualified:
                raise HTTPException(403, "worker must pass the qualification test first")
            hit = session.hits.get(hit_id)
            if hit is None:
                raise HTTPException(404, f"unknown HIT {hit_id!r}")
            if request.pair_id not in hit.pair_ids:
                raise HTTPException(400, f"pair {request.pair_id!r} is not in HIT {hit_id!r}")
            try:
                hit.record_answer(request.worker, request.pair_id, label)
            except DuplicateAnswerError as exc:
                raise HTTPException(409, str(exc))
            session.log_answer(request.worker, request.pair_id, label)
            newly_published: list[str] = []
            newly_deduced: list[tuple[str, Label]] = []
            finalized = False
            if hit.has_quorum(request.pair_id):
                finalized = True
                final = hit.final_label(request.pair_id)
                report, newly = session.engine.apply_final_label(request.pair_id, final)
                newly_published = list(newly)
                newly_deduced = list(report.deduced)
                if newly_published:
                    session.add_hits(newly_published)
            return {
                "accepted": True,
                "finalized": finalized,
                "newly_published": newly_published,
                "newly_deduced": [[pid, lab.value] for pid, lab in newly_deduced],
            }

    @app.get("/api/sessions/{session_id}/status")
    def status(session_id: str) -> dict[str, Any]:
        session = store.get(session_id)
        with session.lock:
            engine = session.engine
            crowd = sum(
                1 for lp in engine.labels.values() if lp.source is LabelSource.CROWD
            )
            return {
                "total": len(engine.by_id),
                "labeled": len(engine.labels),
                "crowdsourced": crowd,
                "deduced": len(engine.labels) - crowd,
                "published_open": len(engine.pending),
                "open_hits": len(session.open_hits()),
                "complete": engine.is_complete(),
            }

    @app.get("/api/sessions/{session_id}/results")
    def results(session_id: str) -> dict[str, Any]:
        session = store.get(session_id)
        with session.lock:
            if not session.engine.is_complete():
                raise HTTPException(409, "session is not complete yet")
            spec = {
                "session_id": session.session_id,
                "batch_size": session.config.batch_size,
                "replicas": session.config.replicas,
                "instant_decision": session.config.instant_decision,
                "nonmatching_first": session.config.nonmatching_first,
                "seed": session.config.seed,
            }
            return build_report(spec, session.engine.result(), session.engine.pairs)

    return app
