"""Command-line entry point: gen, run, score, stats, judge."""

from __future__ import annotations

import argparse
import json
import logging
import sys

from netrepair.harness import load_judge_configs, load_model_config
from netrepair.harness.prompt import DEFAULT_BUDGET
from netrepair.orchestrator import (
    GenerationError,
    dataset_stats,
    generate_dataset,
    judge_report,
    load_topologies,
    run_dataset,
    score_directory,
)


def _print(obj) -> None:
    json.dump(obj, sys.stdout, indent=1, sort_keys=True)
    sys.stdout.write("\n")


def cmd_gen(a) -> int:
    m = generate_dataset(load_topologies(a.topologies), a.out, a.seed, stratify=not a.no_stratify,
                         limit=a.limit, parallel=a.parallel)
    _print({"scenarios": len(m["scenarios"]), "failures": len(m["failures"]),
            "expected": m["expected_scenarios"], "feasible_pairs": m["feasible_pairs"]})
    return 0


def cmd_run(a) -> int:
    r = run_dataset(a.dataset, load_model_config(a.model_config), a.strategy, a.parallel, a.budget, a.out)
    _print(r["aggregates"])
    return 0


def cmd_score(a) -> int:
    _print(score_directory(a.scenario, a.fix).to_dict())
    return 0


def cmd_stats(a) -> int:
    s = dataset_stats(a.dataset)
    _print(s if a.per_scenario else {"aggregate": s["aggregate"], "failures": s["failures"]})
    return 0


def cmd_judge(a) -> int:
    r = judge_report(a.report, load_judge_configs(a.judges))
    _print(r["aggregates"])
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="netrepair", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="cmd", required=True)

    g = sub.add_parser("gen", help="generate a scenario dataset")
    g.add_argument("--topologies", required=True)
    g.add_argument("--out", required=True)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--no-stratify", action="store_true", help="reuse available topologies for empty tiers")
    g.add_argument("--limit", type=int, default=None, help="keep only the first N scenarios")
    g.add_argument("--parallel", type=int, default=1)
    g.set_defaults(fn=cmd_gen)

    r = sub.add_parser("run", help="evaluate a model over a dataset")
    r.add_argument("--dataset", required=True)
    r.add_argument("--model-config", required=True)
    r.add_argument("--strategy", choices=["full", "oracle", "retrieval"], default="full")
    r.add_argument("--parallel", type=int, default=1)
    r.add_argument("--budget", type=int, default=DEFAULT_BUDGET, help="prompt budget in estimated tokens")
    r.add_argument("--out", default=None, help="report path (default DATASET/report.json)")
    r.set_defaults(fn=cmd_run)

    s = sub.add_parser("score", help="score an externally produced fix")
    s.add_argument("--scenario", required=True)
    s.add_argument("--fix", required=True)
    s.set_defaults(fn=cmd_score)

    st = sub.add_parser("stats", help="dataset statistics")
    st.add_argument("--dataset", required=True)
    st.add_argument("--per-scenario", action="store_true")
    st.set_defaults(fn=cmd_stats)

    j = sub.add_parser("judge", help="grade diagnoses in a report with judge models")
    j.add_argument("--report", required=True)
    j.add_argument("--judges", required=True)
    j.set_defaults(fn=cmd_judge)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    try:
        return args.fn(args)
    except (GenerationError, FileNotFoundError, ValueError) as exc:
        print(f"netrepair: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
