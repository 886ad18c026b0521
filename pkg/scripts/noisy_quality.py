"""Result quality of transitive labeling under a noisy crowd.

Sweeps worker error rates and compares the F-measure of the deduction
engine against labeling every pair directly with the same majority-vote
budget (three workers per asked pair).
"""
import argparse
import statistics

from crowdjoin.crowd import NoiseModel, NoisyCrowd
from crowdjoin.labeling import EngineConfig, parallel_label
from crowdjoin.metrics import evaluate, result_labels
from crowdjoin.ordering import heuristic_order
from crowdjoin.synthetic import synthetic_instance


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--objects", type=int, default=60)
    parser.add_argument("--seeds", type=int, default=15)
    parser.add_argument("--replicas", type=int, default=3)
    parser.add_argument("--error-rates", default="0.0,0.05,0.1,0.2")
    args = parser.parse_args()

    rates = [float(t) for t in args.error_rates.split(",") if t.strip()]
    print(f"{args.seeds} seeds per point, replicas={args.replicas}")
    print(f"{'error':>6} {'F transitive':>13} {'F direct':>9} {'questions saved':>16}")
    for rate in rates:
        f_engine, f_direct, saved = [], [], []
        for seed in range(args.seeds):
            pairs, truth = synthetic_instance(args.objects, seed,
                                              cross_per_cluster_pair=6)
            crowd = NoisyCrowd(truth, NoiseModel(error_rate=rate, seed=seed),
                               replicas=args.replicas)
            result = parallel_label(heuristic_order(pairs), pairs, crowd,
                                    EngineConfig(seed=seed))
            f_engine.append(evaluate(result_labels(result), pairs, truth).f_measure)
            direct = {p.pair_id: crowd.answer(p) for p in pairs}
            f_direct.append(evaluate(direct, pairs, truth).f_measure)
            saved.append(result.deduced_count / len(pairs))
        print(f"{rate:6.2f} {statistics.mean(f_engine):13.4f} "
              f"{statistics.mean(f_direct):9.4f} {statistics.mean(saved):15.1%}")


if __name__ == "__main__":
    main()
