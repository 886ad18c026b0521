import itertools
import random

import pytest

from crowdjoin.core import Label, LabelSource, Pair
from crowdjoin.crowd import TruthfulCrowd
from crowdjoin.labeling import (
    EngineConfig,
    EngineMode,
    PairState,
    PairStatus,
    deduce_all,
    label_pairs,
    parallel_crowdsourced_pairs,
    parallel_label,
    sequential_label,
)
from crowdjoin.ordering import (
    GroundTruth,
    LabelingOrder,
    crowdsourced_count,
    enumerate_consistent_worlds,
    heuristic_order,
    random_order,
)
from instances import random_instance

M, N = Label.MATCHING, Label.NON_MATCHING

ALL_FLAG_COMBOS = [(False, False), (False, True), (True, False), (True, True)]


class TestPairState:
    def test_happy_paths(self):
        s = PairState()
        s.publish()
        s.label_from_crowd(M)
        assert (s.status, s.label, s.source) == (PairStatus.LABELED, M, LabelSource.CROWD)
        t = PairState()
        t.label_by_deduction(N)
        assert t.source is LabelSource.DEDUCED

    def test_illegal_transitions(self):
        s = PairState()
        with pytest.raises(ValueError):
            s.label_from_crowd(M)  # never published
        s.publish()
        with pytest.raises(ValueError):
            s.publish()
        with pytest.raises(ValueError):
            s.label_by_deduction(M)  # published pairs wait for the crowd
        s.label_from_crowd(M)
        with pytest.raises(ValueError):
            s.label_from_crowd(M)


class TestSequential:
    def test_running_example(self, running_example):
        pairs, truth = running_example
        result = sequential_label(heuristic_order(pairs), pairs, TruthfulCrowd(truth))
        assert result.crowdsourced_ids == frozenset({"p1", "p2", "p3", "p5", "p6", "p7"})
        assert result.labels["p4"].label is M
        assert result.labels["p8"].label is N
        assert result.labels["p4"].source is LabelSource.DEDUCED
        assert result.crowdsourced_count == 6
        assert result.deduced_count == 2
        # one report per crowd question
        assert len(result.iterations) == 6
        assert all(len(r.published) == 1 for r in result.iterations)

    def test_disconnected_pairs_all_crowdsourced(self):
        pairs = [Pair(f"p{i}", f"a{i}", f"b{i}") for i in range(5)]
        truth = GroundTruth({o: o for p in pairs for o in p.objects})
        result = sequential_label(
            LabelingOrder(tuple(p.pair_id for p in pairs)), pairs, TruthfulCrowd(truth)
        )
        assert result.crowdsourced_count == 5
        assert result.deduced_count == 0

    def test_matches_count_simulation(self):
        rng = random.Random(321)
        for _ in range(200):
            pairs, truth = random_instance(rng, max_objects=9, max_pairs=12)
            order = random_order(pairs, rng.randrange(10**6))
            expected = crowdsourced_count(order, pairs, truth)
            result = sequential_label(order, pairs, TruthfulCrowd(truth))
            assert result.crowdsourced_ids == expected.crowdsourced_ids


class TestPublicationScan:
    def test_first_iteration(self, running_example):
        pairs, _ = running_example
        order = heuristic_order(pairs)
        assert parallel_crowdsourced_pairs(order, pairs, {}) == ["p1", "p2", "p3", "p5", "p6"]

    def test_after_first_round(self, running_example):
        pairs, truth = running_example
        order = heuristic_order(pairs)
        labeled = {pid: truth.pair_label(p) for pid, p in
                   ((p.pair_id, p) for p in pairs) if pid in {"p1", "p2", "p3", "p5", "p6"}}
        labeled.update(dict(deduce_all(order, pairs, labeled)))
        assert set(labeled) == {"p1", "p2", "p3", "p4", "p5", "p6", "p8"}
        assert parallel_crowdsourced_pairs(order, pairs, labeled) == ["p7"]

    def test_everything_labeled(self, running_example):
        pairs, truth = running_example
        order = heuristic_order(pairs)
        labeled = {p.pair_id: truth.pair_label(p) for p in pairs}
        assert parallel_crowdsourced_pairs(order, pairs, labeled) == []

    def test_safety_under_every_consistent_completion(self):
        # anything the scan wants to publish is crowdsourced in every
        # consistent world extending the current labels
        rng = random.Random(60)
        for _ in range(40):
            pairs, truth = random_instance(rng, max_objects=6, max_pairs=7)
            order = random_order(pairs, rng.randrange(10**6))
            by_id = {p.pair_id: p for p in pairs}
            labeled_ids = {
                pid for pid in order.sequence if rng.random() < 0.4
            }
            labeled = {pid: truth.pair_label(by_id[pid]) for pid in labeled_ids}
            publish = parallel_crowdsourced_pairs(order, pairs, labeled)
            for world in enumerate_consistent_worlds(pairs):
                if any(world.assignment[pid] is not labeled[pid] for pid in labeled):
                    continue  # world contradicts what is already known
                world_truth_count = crowdsourced_count_from_assignment(
                    order, pairs, world.assignment
                )
                assert set(publish) <= world_truth_count


def crowdsourced_count_from_assignment(order, pairs, assignment):
    from crowdjoin.ordering import index_pairs, simulate_order

    by_id = index_pairs(pairs)
    crowd, _ = simulate_order(order, by_id, lambda p: assignment[p.pair_id])
    return set(crowd)


class TestDeduceAll:
    def test_running_example_round_one(self, running_example):
        pairs, truth = running_example
        order = heuristic_order(pairs)
        labeled = {
            p.pair_id: truth.pair_label(p)
            for p in pairs
            if p.pair_id in {"p1", "p2", "p3", "p5", "p6"}
        }
        got = dict(deduce_all(order, pairs, labeled))
        assert got == {"p4": M, "p8": N}

    def test_empty_labeled(self, running_example):
        pairs, _ = running_example
        assert deduce_all(heuristic_order(pairs), pairs, {}) == []

    def test_matching_chain(self):
        pairs = [
            Pair("c1", "o1", "o2"),
            Pair("c2", "o2", "o3"),
            Pair("c3", "o3", "o4"),
            Pair("q1", "o1", "o3"),
            Pair("q2", "o1", "o4"),
            Pair("q3", "o2", "o4"),
        ]
        order = LabelingOrder(("c1", "c2", "c3", "q1", "q2", "q3"))
        labeled = {"c1": M, "c2": M, "c3": M}
        got = dict(deduce_all(order, pairs, labeled))
        assert got == {"q1": M, "q2": M, "q3": M}

    def test_exclusion_keeps_published_open(self, running_example):
        pairs, truth = running_example
        order = heuristic_order(pairs)
        labeled = {
            p.pair_id: truth.pair_label(p)
            for p in pairs
            if p.pair_id in {"p1", "p2", "p3", "p5", "p6"}
        }
        got = dict(deduce_all(order, pairs, labeled, exclude={"p4"}))
        assert got == {"p8": N}


class TestParallel:
    def test_running_example_two_iterations(self, running_example):
        pairs, truth = running_example
        result = parallel_label(
            heuristic_order(pairs), pairs, TruthfulCrowd(truth), EngineConfig(seed=1)
        )
        assert [r.published for r in result.iterations] == [
            ["p1", "p2", "p3", "p5", "p6"],
            ["p7"],
        ]
        assert result.crowdsourced_ids == frozenset({"p1", "p2", "p3", "p5", "p6", "p7"})
        assert result.deduced_count == 2

    def test_requires_parallel_mode(self, running_example):
        pairs, truth = running_example
        with pytest.raises(ValueError):
            parallel_label(
                heuristic_order(pairs),
                pairs,
                TruthfulCrowd(truth),
                EngineConfig(mode=EngineMode.SEQUENTIAL),
            )

    def test_instant_decision_unlocks_early(self, running_example):
        pairs, truth = running_example
        result = parallel_label(
            heuristic_order(pairs),
            pairs,
            TruthfulCrowd(truth),
            EngineConfig(instant_decision=True),
            arrival_order=["p3", "p6", "p1", "p2", "p5", "p7"],
        )
        answered_at = {}
        published_at = {}
        for r in result.iterations:
            for pid in r.published:
                published_at[pid] = r.iteration
            for pid, _ in r.crowd_labeled:
                answered_at[pid] = r.iteration
        # p7 cannot be identified until both non-matching answers are in,
        # and must not wait for the matching ones
        assert published_at["p7"] > answered_at["p6"]
        assert published_at["p7"] <= min(answered_at[p] for p in ("p1", "p2", "p5"))

    def test_matching_answers_publish_nothing(self, running_example):
        pairs, truth = running_example
        result = parallel_label(
            heuristic_order(pairs),
            pairs,
            TruthfulCrowd(truth),
            EngineConfig(instant_decision=True, seed=5),
        )
        previous_label: Label | None = None
        for r in result.iterations:
            if previous_label is M:
                assert r.published == []
            assert len(r.crowd_labeled) == 1
            previous_label = r.crowd_labeled[0][1]

    def test_no_pair_published_twice_and_deduced_never_published(self, running_example):
        pairs, truth = running_example
        for instant, nf in ALL_FLAG_COMBOS:
            result = parallel_label(
                heuristic_order(pairs),
                pairs,
                TruthfulCrowd(truth),
                EngineConfig(instant_decision=instant, nonmatching_first=nf, seed=2),
            )
            published = list(
                itertools.chain.from_iterable(r.published for r in result.iterations)
            )
            assert len(published) == len(set(published))
            assert set(published) == set(result.crowdsourced_ids)
            assert not set(published) & result.deduced_ids

    def test_monotone_progress(self, running_example):
        pairs, truth = running_example
        result = parallel_label(
            heuristic_order(pairs), pairs, TruthfulCrowd(truth),
            EngineConfig(instant_decision=True, seed=9),
        )
        labeled_so_far = 0
        for r in result.iterations:
            gained = len(r.crowd_labeled) + len(r.deduced)
            assert gained >= 1
            labeled_so_far += gained
        assert labeled_so_far == len(pairs)

    @pytest.mark.parametrize("instant,nf", ALL_FLAG_COMBOS)
    def test_equivalence_with_sequential(self, instant, nf):
        rng = random.Random(808)
        for _ in range(50):
            pairs, truth = random_instance(rng, max_objects=10, max_pairs=16)
            order = random_order(pairs, rng.randrange(10**6))
            seq = sequential_label(order, pairs, TruthfulCrowd(truth))
            par = parallel_label(
                order,
                pairs,
                TruthfulCrowd(truth),
                EngineConfig(instant_decision=instant, nonmatching_first=nf,
                             seed=rng.randrange(10**6)),
            )
            assert par.crowdsourced_ids == seq.crowdsourced_ids
            assert {pid: lp.label for pid, lp in par.labels.items()} == {
                pid: lp.label for pid, lp in seq.labels.items()
            }

    def test_label_pairs_dispatch(self, running_example):
        pairs, truth = running_example
        seq = label_pairs(
            heuristic_order(pairs), pairs, TruthfulCrowd(truth),
            EngineConfig(mode=EngineMode.SEQUENTIAL),
        )
        par = label_pairs(
            heuristic_order(pairs), pairs, TruthfulCrowd(truth),
            EngineConfig(mode=EngineMode.PARALLEL),
        )
        assert seq.crowdsourced_ids == par.crowdsourced_ids
