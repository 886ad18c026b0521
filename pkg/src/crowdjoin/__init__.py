"""crowdjoin: label candidate record pairs with as few crowd questions as
transitive deduction allows."""

from .core import (
    ClusterGraph,
    DeduceResult,
    InsertOutcome,
    Label,
    LabeledPair,
    LabelSource,
    Pair,
    brute_force_deduce,
    deduce_label,
    insert_labeled,
    new_cluster_graph,
)
from .crowd import NoiseModel, NoisyCrowd, TruthfulCrowd, batch_into_hits, majority_vote
from .labeling import (
    EngineConfig,
    EngineMode,
    LabelingResult,
    parallel_crowdsourced_pairs,
    parallel_label,
    sequential_label,
)
from .ordering import (
    GroundTruth,
    LabelingOrder,
    crowdsourced_count,
    enumerate_consistent_worlds,
    expected_crowdsourced_count,
    heuristic_order,
    oracle_optimal_order,
    oracle_worst_order,
    random_order,
)

__version__ = "0.1.0"

__all__ = [
    "ClusterGraph",
    "DeduceResult",
    "EngineConfig",
    "EngineMode",
    "GroundTruth",
    "InsertOutcome",
    "Label",
    "LabeledPair",
    "LabelSource",
    "LabelingOrder",
    "LabelingResult",
    "NoiseModel",
    "NoisyCrowd",
    "Pair",
    "TruthfulCrowd",
    "batch_into_hits",
    "brute_force_deduce",
    "crowdsourced_count",
    "deduce_label",
    "enumerate_consistent_worlds",
    "expected_crowdsourced_count",
    "heuristic_order",
    "insert_labeled",
    "majority_vote",
    "new_cluster_graph",
    "oracle_optimal_order",
    "oracle_worst_order",
    "parallel_crowdsourced_pairs",
    "parallel_label",
    "random_order",
    "sequential_label",
]
