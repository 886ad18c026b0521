"""Acceptance suite: one test per release criterion, each printing a PASS
line with the measured numbers (run with ``pytest tests/test_acceptance.py -v -s``).

Every tolerance is pinned here; engine code must satisfy these as stated.
"""

import itertools
import json
import random
import statistics
import time
from collections import defaultdict

import pytest

from crowdjoin.core import Label, Pair, brute_force_deduce, build_cluster_graph, deduce_label
from crowdjoin.crowd import NoiseModel, NoisyCrowd, ScriptedCrowd, TruthfulCrowd
from crowdjoin.labeling import (
    EngineConfig,
    parallel_crowdsourced_pairs,
    parallel_label,
    sequential_label,
)
from crowdjoin.metrics import evaluate, result_labels, savings
from crowdjoin.ordering import (
    GroundTruth,
    LabelingOrder,
    crowdsourced_count,
    expected_crowdsourced_count,
    heuristic_order,
    oracle_optimal_order,
    oracle_worst_order,
    random_order,
)
from crowdjoin.synthetic import synthetic_instance
from instances import random_instance, truth_labeled

M, N = Label.MATCHING, Label.NON_MATCHING


def ok(criterion: int, detail: str) -> None:
    print(f"ACCEPTANCE {criterion:02d}: PASS  {detail}")


def test_criterion_01_expected_count_reproduction(order_triangle):
    """Expected crowdsourced counts of the 0.9/0.5/0.1 triangle, all six
    orders, within +/-0.005 of 2.09/2.17/2.83; under one second."""
    pairs, _ = order_triangle
    expected = {
        ("p1", "p2", "p3"): 2.09,
        ("p1", "p3", "p2"): 2.17,
        ("p2", "p3", "p1"): 2.83,
        ("p2", "p1", "p3"): 2.09,
        ("p3", "p1", "p2"): 2.17,
        ("p3", "p2", "p1"): 2.83,
    }
    start = time.perf_counter()
    got = {
        seq: expected_crowdsourced_count(LabelingOrder(seq), pairs)
        for seq in expected
    }
    elapsed = time.perf_counter() - start
    for seq, target in expected.items():
        assert abs(got[seq] - target) <= 0.005, (seq, got[seq], target)
    assert elapsed < 1.0
    ok(1, f"six orders -> {[round(got[s], 4) for s in expected]} in {elapsed:.3f}s")


def test_criterion_02_order_sensitivity(order_triangle):
    """The two triangle orders cost exactly 2 and 3 crowdsourced pairs."""
    pairs, truth = order_triangle
    two = crowdsourced_count(LabelingOrder(("p1", "p2", "p3")), pairs, truth).count
    three = crowdsourced_count(LabelingOrder(("p2", "p3", "p1")), pairs, truth).count
    assert (two, three) == (2, 3)
    ok(2, "matching-first order costs 2, non-matching-first costs 3")


def test_criterion_03_running_example(running_example):
    """Sequential: crowdsources exactly {p1,p2,p3,p5,p6,p7}, deduces p4
    matching and p8 non-matching.  Parallel: exactly two iterations with
    publish sets {p1,p2,p3,p5,p6} then {p7}."""
    pairs, truth = running_example
    order = heuristic_order(pairs)

    seq = sequential_label(order, pairs, TruthfulCrowd(truth))
    assert seq.crowdsourced_ids == frozenset({"p1", "p2", "p3", "p5", "p6", "p7"})
    assert seq.labels["p4"].label is M and seq.labels["p4"].source.value == "deduced"
    assert seq.labels["p8"].label is N and seq.labels["p8"].source.value == "deduced"

    par = parallel_label(order, pairs, TruthfulCrowd(truth), EngineConfig(seed=0))
    assert len(par.iterations) == 2
    assert par.iterations[0].published == ["p1", "p2", "p3", "p5", "p6"]
    assert par.iterations[1].published == ["p7"]
    ok(3, "sequential partition and two-iteration parallel publish sets as stated")


def test_criterion_04_oracle_equivalence():
    """>=500 seeded instances (<=10 objects): deduce_label agrees with the
    path-enumeration oracle on every query pair; under 30 seconds."""
    rng = random.Random(20130601)
    start = time.perf_counter()
    instances = 0
    queries = 0
    for _ in range(500):
        pairs, truth = random_instance(rng, max_objects=10, max_pairs=14)
        labeled = truth_labeled(pairs, truth)
        graph = build_cluster_graph(labeled)
        objects = sorted({o for p in pairs for o in p.objects})
        for a, b in itertools.combinations(objects, 2):
            query = Pair("q", a, b)
            assert deduce_label(query, graph) is brute_force_deduce(query, labeled)
            queries += 1
        instances += 1
    elapsed = time.perf_counter() - start
    assert instances >= 500
    assert elapsed < 30.0
    ok(4, f"{instances} instances, {queries} queries, 0 mismatches in {elapsed:.1f}s")


def test_criterion_05_order_theory():
    """>=100 seeded instances (<=7 pairs): matching-first order equals the
    exhaustive-permutation minimum; within-group shuffles never change the
    count; (non-matching, matching) adjacent swaps never increase it."""
    rng = random.Random(41)
    instances = 0
    swap_checks = 0
    while instances < 100:
        pairs, truth = random_instance(rng, max_objects=7, max_pairs=7)
        ids = [p.pair_id for p in pairs]
        best = crowdsourced_count(oracle_optimal_order(pairs, truth), pairs, truth).count
        minimum = min(
            crowdsourced_count(LabelingOrder(perm), pairs, truth).count
            for perm in itertools.permutations(ids)
        )
        assert best == minimum, (pairs, truth)

        matching = sorted(p.pair_id for p in pairs if truth.pair_label(p) is M)
        nonmatching = sorted(p.pair_id for p in pairs if truth.pair_label(p) is N)
        for _ in range(4):
            rng.shuffle(matching)
            rng.shuffle(nonmatching)
            shuffled = LabelingOrder(tuple(matching + nonmatching))
            assert crowdsourced_count(shuffled, pairs, truth).count == best

        labels = {p.pair_id: truth.pair_label(p) for p in pairs}
        rng.shuffle(ids)
        for i in range(len(ids) - 1):
            if labels[ids[i]] is N and labels[ids[i + 1]] is M:
                swapped = ids[:]
                swapped[i], swapped[i + 1] = swapped[i + 1], swapped[i]
                before = crowdsourced_count(LabelingOrder(tuple(ids)), pairs, truth).count
                after = crowdsourced_count(LabelingOrder(tuple(swapped)), pairs, truth).count
                assert after <= before
                swap_checks += 1
        instances += 1
    ok(5, f"{instances} instances: optimal==min, shuffles stable, {swap_checks} swaps monotone")


def test_criterion_06_parallel_sequential_equivalence():
    """>=200 seeded instances (<=50 pairs): the parallel engine crowdsources
    exactly the sequential engine's pair set under all four flag settings."""
    rng = random.Random(505)
    combos = [(False, False), (False, True), (True, False), (True, True)]
    instances = 0
    for _ in range(200):
        pairs, truth = random_instance(rng, max_objects=14, max_pairs=50)
        order = random_order(pairs, rng.randrange(10**6))
        seq = sequential_label(order, pairs, TruthfulCrowd(truth))
        for instant, nf in combos:
            par = parallel_label(
                order,
                pairs,
                TruthfulCrowd(truth),
                EngineConfig(
                    instant_decision=instant,
                    nonmatching_first=nf,
                    seed=rng.randrange(10**6),
                ),
            )
            assert par.crowdsourced_ids == seq.crowdsourced_ids, (instant, nf)
        instances += 1
    ok(6, f"{instances} instances x {len(combos)} flag settings: identical crowdsourced sets")


def test_criterion_07_transitivity_savings():
    """One 102-object cluster: 5151 candidate pairs cost 101 questions and
    5050 deductions.  A 3-object cluster costs 2."""
    objects = [f"o{i:03d}" for i in range(102)]
    truth = GroundTruth({o: "dup" for o in objects})
    pairs = [
        Pair(f"{a}|{b}", a, b)
        for i, a in enumerate(objects)
        for b in objects[i + 1 :]
    ]
    assert len(pairs) == 5151
    result = parallel_label(
        heuristic_order(pairs), pairs, TruthfulCrowd(truth), EngineConfig(seed=0)
    )
    s = savings(result)
    assert (s.crowdsourced, s.deduced) == (101, 5050)

    small_truth = GroundTruth({"a": "e", "b": "e", "c": "e"})
    small = [Pair("p1", "a", "b"), Pair("p2", "a", "c"), Pair("p3", "b", "c")]
    small_result = sequential_label(
        heuristic_order(small), small, TruthfulCrowd(small_truth)
    )
    assert savings(small_result).crowdsourced == 2
    ok(7, "102-cluster: 5151 -> 101 crowdsourced; 3-cluster: 3 -> 2")


def test_criterion_08_instant_decision(running_example):
    """After answers for p3 and p6 alone, p7 is published before p1/p2/p5 are
    answered; a matching answer never publishes anything new."""
    pairs, truth = running_example
    order = heuristic_order(pairs)
    result = parallel_label(
        order,
        pairs,
        TruthfulCrowd(truth),
        EngineConfig(instant_decision=True, seed=0),
        arrival_order=["p3", "p6", "p1", "p2", "p5", "p7"],
    )
    published_at, answered_at = {}, {}
    for r in result.iterations:
        for pid in r.published:
            published_at[pid] = r.iteration
        for pid, _ in r.crowd_labeled:
            answered_at[pid] = r.iteration
    assert published_at["p7"] > answered_at["p6"] >= answered_at["p3"]
    assert published_at["p7"] <= min(answered_at[p] for p in ("p1", "p2", "p5"))

    # a matching answer can never unlock a publication: with the matching
    # assumption already in place for unlabeled pairs, learning "matching"
    # adds nothing
    for known in ({"p1": M}, {"p1": M, "p2": M}, {"p5": M}):
        before = parallel_crowdsourced_pairs(order, pairs, {})
        after = parallel_crowdsourced_pairs(order, pairs, known)
        assert set(after) <= set(before)
    matching_followups = [
        result.iterations[i + 1].published
        for i, r in enumerate(result.iterations[:-1])
        if r.crowd_labeled and r.crowd_labeled[0][1] is M
    ]
    assert all(pub == [] for pub in matching_followups)
    ok(8, "p7 published straight after p6's answer; matching answers unlock nothing")


def test_criterion_09_order_quality_trend():
    """50 seeded synthetic datasets (200 objects, skewed clusters): mean
    crowdsourced counts satisfy optimal <= heuristic <= random <= worst and
    worst >= 2x optimal; under two minutes."""
    start = time.perf_counter()
    sums = defaultdict(list)
    for seed in range(50):
        pairs, truth = synthetic_instance(200, seed)
        orders = {
            "optimal": oracle_optimal_order(pairs, truth),
            "worst": oracle_worst_order(pairs, truth),
            "heuristic": heuristic_order(pairs),
            "random": random_order(pairs, seed * 31 + 7),
        }
        for name, order in orders.items():
            sums[name].append(crowdsourced_count(order, pairs, truth).count)
    mean = {name: statistics.mean(v) for name, v in sums.items()}
    elapsed = time.perf_counter() - start
    assert mean["optimal"] <= mean["heuristic"] <= mean["random"] <= mean["worst"]
    assert mean["worst"] / mean["optimal"] >= 2.0
    assert elapsed < 120.0
    ok(
        9,
        "mean C: optimal={optimal:.0f} <= heuristic={heuristic:.0f} <= "
        "random={random:.0f} <= worst={worst:.0f} ({ratio:.1f}x) in {t:.0f}s".format(
            ratio=mean["worst"] / mean["optimal"], t=elapsed, **mean
        ),
    )


def test_criterion_10_noisy_quality():
    """error_rate=0.1, replicas=3, majority vote: mean F-measure with
    transitive deduction stays within 6 percentage points of labeling every
    pair directly on the same votes-per-pair budget."""
    f_transitive, f_direct = [], []
    for seed in range(15):
        pairs, truth = synthetic_instance(60, seed, cross_per_cluster_pair=6)
        crowd = NoisyCrowd(truth, NoiseModel(error_rate=0.1, seed=seed), replicas=3)
        engine_result = parallel_label(
            heuristic_order(pairs), pairs, crowd, EngineConfig(seed=seed)
        )
        f_transitive.append(evaluate(result_labels(engine_result), pairs, truth).f_measure)
        direct = {p.pair_id: crowd.answer(p) for p in pairs}
        f_direct.append(evaluate(direct, pairs, truth).f_measure)
    mean_t = statistics.mean(f_transitive)
    mean_d = statistics.mean(f_direct)
    assert mean_t >= mean_d - 0.06, (mean_t, mean_d)
    ok(10, f"mean F: transitive={mean_t:.3f} vs direct={mean_d:.3f} "
           f"(loss {max(0.0, mean_d - mean_t):.3f} <= 0.06)")


def test_criterion_11_replay_equivalence(running_example, tmp_path):
    """A completed service session's answer log, replayed through the offline
    engine, reproduces the identical crowdsourced/deduced partition and
    report iterations."""
    from fastapi.testclient import TestClient

    from crowdjoin.report import crowdsourced_ids, deduced_ids
    from crowdjoin.service import create_app

    pairs, truth = running_example
    app = create_app(sessions_dir=tmp_path)
    with TestClient(app) as client:
        candidates = [
            {"pair_id": p.pair_id, "left": p.left, "right": p.right,
             "likelihood": p.likelihood}
            for p in pairs
        ]
        created = client.post(
            "/api/sessions",
            json={"candidates": candidates, "config": {"replicas": 1, "seed": 2}},
        ).json()
        sid = created["session_id"]
        while not client.get(f"/api/sessions/{sid}/status").json()["complete"]:
            view = client.get(
                f"/api/sessions/{sid}/hits/next", params={"worker": "w1"}
            ).json()
            for pid in view["open"]:
                label = truth.pair_label(next(p for p in pairs if p.pair_id == pid))
                client.post(
                    f"/api/sessions/{sid}/hits/{view['hit_id']}/answers",
                    json={"worker": "w1", "pair_id": pid, "label": label.value},
                )
        service_report = client.get(f"/api/sessions/{sid}/results").json()

    final, sequence = {}, []
    with open(tmp_path / f"{sid}.jsonl") as fh:
        for line in fh:
            entry = json.loads(line)
            final[entry["pair_id"]] = Label(entry["label"])
            sequence.append(entry["pair_id"])

    offline = parallel_label(
        heuristic_order(pairs),
        pairs,
        ScriptedCrowd(final),
        EngineConfig(instant_decision=True, seed=2),
        arrival_order=sequence,
    )
    assert offline.crowdsourced_ids == crowdsourced_ids(service_report)
    assert offline.deduced_ids == deduced_ids(service_report)
    offline_iterations = [
        {
            "iteration": r.iteration,
            "published": list(r.published),
            "crowd_labeled": [[pid, l.value] for pid, l in r.crowd_labeled],
            "deduced": [[pid, l.value] for pid, l in r.deduced],
            "conflicts": r.conflicts,
        }
        for r in offline.iterations
    ]
    assert offline_iterations == service_report["iterations"]
    assert savings(offline).iteration_sizes == tuple(
        service_report["savings"]["iteration_sizes"]
    )
    ok(11, "service log replayed offline: identical partition, iterations, savings")
