"""Command-line front door: candidate generation, simulation runs, expected
cost, experiment sweeps, and the labeling service.

All commands are deterministic under a fixed --seed (default taken from the
CROWDJOIN_SEED environment variable).
"""

from __future__ import annotations

import argparse
import csv
import os
import sys
from dataclasses import asdict, dataclass

from .crowd import NoiseModel, NoisyCrowd, TruthfulCrowd
from .ingestion import (
    Dataset,
    DatasetError,
    generate_candidates,
    load_candidates_jsonl,
    load_csv,
    load_truth,
    unknown_objects,
    write_candidates_jsonl,
)
from .labeling import EngineConfig, EngineMode, label_pairs
from .metrics import evaluate, result_labels
from .ordering import (
    LabelingOrder,
    heuristic_order,
    index_pairs,
    oracle_optimal_order,
    oracle_worst_order,
    random_order,
)
from .report import build_report, dumps_report, write_report

SEED_ENV = "CROWDJOIN_SEED"

ORDER_CHOICES = ("optimal", "worst", "heuristic", "random")
ORACLE_ORDERS = ("optimal", "worst")  # need ground truth; baselines, not strategies


@dataclass
class RunSpec:
    """Flags of one labeling run, echoed verbatim into the report."""

    dataset: str
    truth: str
    threshold: float
    order: str = "heuristic"
    mode: str = "parallel"
    instant_decision: bool = False
    nonmatching_first: bool = False
    error_rate: float = 0.0
    replicas: int = 1
    batch_size: int = 20
    seed: int = 0
    dataset2: str | None = None
    output: str | None = None


def default_seed() -> int:
    return int(os.environ.get(SEED_ENV, "0"))


def _load_dataset(path: str, path2: str | None) -> Dataset:
    dataset = load_csv(path)
    if path2:
        dataset = Dataset(records=dataset.records, records_b=load_csv(path2).records)
    return dataset


def _make_order(kind: str, pairs, truth, seed: int) -> LabelingOrder:
    if kind == "optimal":
        return oracle_optimal_order(pairs, truth)
    if kind == "worst":
        return oracle_worst_order(pairs, truth)
    if kind == "heuristic":
        return heuristic_order(pairs)
    if kind == "random":
        return random_order(pairs, seed)
    raise ValueError(f"unknown order {kind!r}")


def _spec_echo(spec: RunSpec) -> dict:
    # the report describes the run, not its own destination
    echo = asdict(spec)
    echo.pop("output", None)
    return echo


def _run_spec(spec: RunSpec) -> dict:
    dataset = _load_dataset(spec.dataset, spec.dataset2)
    truth = load_truth(spec.truth)
    missing = unknown_objects(truth, dataset)
    if missing:
        print(
            f"warning: truth references {len(missing)} unknown object(s): "
            + ", ".join(missing[:5]),
            file=sys.stderr,
        )
    pairs = generate_candidates(dataset, spec.threshold).pairs
    if spec.order in ORACLE_ORDERS:
        print(f"note: order={spec.order} is an oracle baseline (uses ground truth)",
              file=sys.stderr)
    order = _make_order(spec.order, pairs, truth, spec.seed)
    if spec.error_rate > 0:
        crowd = NoisyCrowd(truth, NoiseModel(spec.error_rate, spec.seed), spec.replicas)
    else:
        crowd = TruthfulCrowd(truth)
    config = EngineConfig(
        mode=EngineMode(spec.mode),
        instant_decision=spec.instant_decision,
        nonmatching_first=spec.nonmatching_first,
        seed=spec.seed,
    )
    result = label_pairs(order, pairs, crowd, config)
    quality = evaluate(result_labels(result), pairs, truth) if pairs else None
    return build_report(_spec_echo(spec), result, pairs, quality)


def cmd_candidates(args) -> int:
    dataset = _load_dataset(args.dataset, args.dataset2)
    cand = generate_candidates(dataset, args.threshold)
    write_candidates_jsonl(args.out, cand.pairs)
    print(f"{len(cand.pairs)} candidate pair(s) at threshold {args.threshold} -> {args.out}")
    return 0


def cmd_run(args) -> int:
    spec = RunSpec(
        dataset=args.dataset,
        dataset2=args.dataset2,
        truth=args.truth,
        threshold=args.threshold,
        order=args.order,
        mode=args.mode,
        instant_decision=args.instant_decision,
        nonmatching_first=args.nonmatching_first,
        error_rate=args.error_rate,
        replicas=args.replicas,
        batch_size=args.batch_size,
        seed=args.seed,
        output=args.out,
    )
    report = _run_spec(spec)
    if args.out:
        write_report(args.out, report)
    else:
        sys.stdout.write(dumps_report(report))
    s = report["savings"]
    print(
        f"crowdsourced={s['crowdsourced']} deduced={s['deduced']} "
        f"iterations={len(s['iteration_sizes'])}",
        file=sys.stderr,
    )
    return 0


def cmd_expected(args) -> int:
    from .ordering import expected_crowdsourced_count

    pairs = load_candidates_jsonl(args.pairs)
    if args.order == "heuristic":
        order = heuristic_order(pairs)
    elif args.order == "file":
        order = LabelingOrder(tuple(p.pair_id for p in pairs))
    else:
        order = LabelingOrder(tuple(s.strip() for s in args.order.split(",") if s.strip()))
        index_pairs(pairs)  # surfaces duplicate ids before the permutation check
    value = expected_crowdsourced_count(order, pairs, cap=args.cap)
    print(f"{value:.6f}")
    return 0


def _parse_floats(text: str) -> list[float]:
    return [float(t) for t in text.split(",") if t.strip()]


def _parse_names(text: str) -> list[str]:
    return [t.strip() for t in text.split(",") if t.strip()]


def _parse_seeds(text: str) -> list[int]:
    if not text.strip():
        return []
    if ":" in text:
        lo, hi = text.split(":", 1)
        return list(range(int(lo), int(hi)))
    return [int(t) for t in text.split(",") if t.strip()]


SWEEP_COLUMNS = [
    "threshold",
    "order",
    "mode",
    "instant_decision",
    "nonmatching_first",
    "seed",
    "candidates",
    "crowdsourced",
    "deduced",
    "iterations",
    "precision",
    "recall",
    "f_measure",
]


def cmd_sweep(args) -> int:
    thresholds = _parse_floats(args.thresholds)
    orders = _parse_names(args.orders)
    seeds = _parse_seeds(args.seeds)
    bad = [o for o in orders if o not in ORDER_CHOICES]
    if bad:
        raise ValueError(f"unknown order(s) in sweep: {', '.join(bad)}")
    rows = []
    for threshold in thresholds:
        for order in orders:
            for seed in seeds:
                spec = RunSpec(
                    dataset=args.dataset,
                    dataset2=args.dataset2,
                    truth=args.truth,
                    threshold=threshold,
                    order=order,
                    mode=args.mode,
                    instant_decision=args.instant_decision,
                    nonmatching_first=args.nonmatching_first,
                    error_rate=args.error_rate,
                    replicas=args.replicas,
                    seed=seed,
                )
                report = _run_spec(spec)
                savings = report["savings"]
                quality = report["quality"] or {}
                rows.append(
                    {
                        "threshold": threshold,
                        "order": order,
                        "mode": args.mode,
                        "instant_decision": args.instant_decision,
                        "nonmatching_first": args.nonmatching_first,
                        "seed": seed,
                        "candidates": savings["total_pairs"],
                        "crowdsourced": savings["crowdsourced"],
                        "deduced": savings["deduced"],
                        "iterations": len(savings["iteration_sizes"]),
                        "precision": quality.get("precision", ""),
                        "recall": quality.get("recall", ""),
                        "f_measure": quality.get("f_measure", ""),
                    }
                )
    with open(args.out, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=SWEEP_COLUMNS)
        writer.writeheader()
        writer.writerows(rows)
    print(f"{len(rows)} sweep row(s) -> {args.out}")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    app = create_app(sessions_dir=args.sessions_dir)
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="crowdjoin",
        description="Label candidate record pairs with as few crowd questions "
        "as transitive deduction allows.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_dataset_flags(p):
        p.add_argument("--dataset", required=True, help="record CSV (header: id,attr,...)")
        p.add_argument("--dataset2", default=None,
                       help="second collection for a cross-table join")

    p = sub.add_parser("candidates", help="generate the thresholded candidate pair set")
    add_dataset_flags(p)
    p.add_argument("--threshold", type=float, required=True)
    p.add_argument("--out", required=True, help="output JSONL path")
    p.set_defaults(func=cmd_candidates)

    p = sub.add_parser("run", help="run one labeling simulation and write a report")
    add_dataset_flags(p)
    p.add_argument("--truth", required=True, help="truth CSV (object_id,cluster_id)")
    p.add_argument("--threshold", type=float, required=True)
    p.add_argument("--order", choices=ORDER_CHOICES, default="heuristic")
    p.add_argument("--mode", choices=("sequential", "parallel"), default="parallel")
    p.add_argument("--instant-decision", action="store_true")
    p.add_argument("--nonmatching-first", action="store_true")
    p.add_argument("--error-rate", type=float, default=0.0)
    p.add_argument("--replicas", type=int, default=1)
    p.add_argument("--batch-size", type=int, default=20)
    p.add_argument("--seed", type=int, default=default_seed())
    p.add_argument("--out", default=None, help="report JSON path (stdout if omitted)")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("expected", help="expected crowdsourced count of an order")
    p.add_argument("--pairs", required=True, help="candidate JSONL path")
    p.add_argument(
        "--order",
        default="heuristic",
        help="'heuristic', 'file', or an explicit comma-separated pair-id list",
    )
    p.add_argument("--cap", type=int, default=20, help="world-enumeration pair cap")
    p.set_defaults(func=cmd_expected)

    p = sub.add_parser("sweep", help="cartesian sweep writing one CSV row per run")
    add_dataset_flags(p)
    p.add_argument("--truth", required=True)
    p.add_argument("--thresholds", default="", help="comma-separated, e.g. 0.5,0.4,0.3")
    p.add_argument("--orders", default="", help="comma-separated subset of "
                   + ",".join(ORDER_CHOICES))
    p.add_argument("--seeds", default="", help="comma list '0,1,2' or range '0:50'")
    p.add_argument("--mode", choices=("sequential", "parallel"), default="parallel")
    p.add_argument("--instant-decision", action="store_true")
    p.add_argument("--nonmatching-first", action="store_true")
    p.add_argument("--error-rate", type=float, default=0.0)
    p.add_argument("--replicas", type=int, default=1)
    p.add_argument("--out", required=True, help="output CSV path")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("serve", help="start the HTTP labeling service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8080)
    p.add_argument("--sessions-dir", default=None,
                   help="directory for per-session answer logs")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (DatasetError, ValueError, FileNotFoundError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
