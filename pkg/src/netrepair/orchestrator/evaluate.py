"""Running a solver over a dataset, scoring fixes, and writing report.json."""

from __future__ import annotations

import json
import time
from concurrent.futures import ThreadPoolExecutor
from importlib import resources
from pathlib import Path

import jsonschema

from netrepair.configtext import parse_configs_lenient
from netrepair.faults import KINDS
from netrepair.harness import (
    PROMPT_VERSION,
    EndpointError,
    ModelConfig,
    ProblemInput,
    ScenarioContext,
    Strategy,
    estimate_tokens,
    judge_diagnosis,
    localization_f1,
    make_client,
    solve,
)
from netrepair.harness.prompt import DEFAULT_BUDGET
from netrepair.orchestrator.pipeline import LoadedScenario, dump_json, load_manifest, load_scenario, read_configs
from netrepair.simulator import DivergenceError, compute_dataplane
from netrepair.specs import ScoreReport, score

REPORT_SCHEMA = json.loads(resources.files("netrepair").joinpath("data/report.schema.json").read_text())


def score_fix(sc: LoadedScenario, fixed: dict[str, str]) -> tuple[ScoreReport, dict[str, str]]:
    """Score a candidate configuration set; routers missing from ``fixed`` keep their broken text.

    Returns the report and any per-router parse errors (such routers simulate as empty devices).
    """
    configs = {r: fixed.get(r, sc.broken[r]) for r in sc.broken}
    models, errors = parse_configs_lenient(configs)
    try:
        table = compute_dataplane(models, sc.topology, sc.golden_table.universe)
    except DivergenceError as exc:
        # a fix whose BGP never settles is scored as if nothing had been changed
        errors["*"] = str(exc)
        table = compute_dataplane(parse_configs_lenient(sc.broken)[0], sc.topology, sc.golden_table.universe)
    return score(sc.spec, sc.violations, table, sc.golden_table), errors


def score_directory(scenario_dir: str | Path, fix_dir: str | Path) -> ScoreReport:
    sc = load_scenario(scenario_dir)
    return score_fix(sc, read_configs(Path(fix_dir)))[0]


def context_for(sc: LoadedScenario) -> ScenarioContext:
    return ScenarioContext(
        routers=tuple(sc.topology.routers),
        truth_routers=tuple(sc.diff.affected_routers),
        fault_summaries=tuple(f"{f.kind} on {f.binding.get('router', f.binding)}: {KINDS[f.kind].summary}" for f in sc.diff.faults),
        repair=sc.diff.repair_script(),
    )


def _unsolved(record: dict, sc: LoadedScenario) -> dict:
    record.update(
        solved=False,
        score={"violations": len(sc.violations), "fixed": [], "unfixed": [str(p) for p in sc.violations],
               "regressed": [], "fix_score": 0.0, "regression_rate": 0.0, "strictly_correct": False},
        localization={"precision": 0.0, "recall": 0.0, "f1": 0.0},
    )
    return record


def run_scenario(sc: LoadedScenario, cfg: ModelConfig, strategy: Strategy, budget: int, transcripts: Path | None) -> dict:
    client = make_client(cfg)
    inp = ProblemInput(sc.topology, sc.broken, sc.violations, strategy, tuple(sc.diff.affected_routers))
    record: dict = {"id": sc.id, "path": str(sc.path), "strategy": strategy.value, "model": cfg.model,
                    "errored": False, "retries": 0, "warnings": []}
    t0 = time.monotonic()
    try:
        attempt, retrieval = solve(client, inp, budget, context_for(sc))
    except EndpointError as exc:
        record.update(errored=True, error=str(exc), wall_time_s=time.monotonic() - t0)
        return _unsolved(record, sc)
    record["retries"] = attempt.retries
    record["warnings"] = list(attempt.warnings)
    msgs = attempt.transcript + (retrieval.transcript if retrieval else [])
    record["tokens"] = {
        "prompt": sum(estimate_tokens(m["content"]) for m in msgs if m["role"] == "user"),
        "completion": sum(estimate_tokens(m["content"]) for m in msgs if m["role"] == "assistant"),
    }
    if retrieval is not None:
        record["retrieval"] = {"selected": list(retrieval.selected), "recall": retrieval.recall, "fell_back": retrieval.fell_back}
    if transcripts is not None:
        transcripts.mkdir(parents=True, exist_ok=True)
        tp = transcripts / f"{sc.id}.json"
        dump_json(tp, {"repair": attempt.transcript, "retrieval": retrieval.transcript if retrieval else None})
        record["transcript"] = str(tp)
    if not attempt.solved:
        _unsolved(record, sc)
    else:
        report, errors = score_fix(sc, attempt.fixed)
        record["warnings"] += [f"{r}: {e}" for r, e in sorted(errors.items())]
        record.update(
            solved=True,
            score=report.to_dict(),
            localization=localization_f1(attempt.solution.faulty_routers, sc.diff.affected_routers),
            predicted_routers=attempt.solution.faulty_routers,
            diagnosis=attempt.solution.diagnosis,
        )
    record["wall_time_s"] = round(time.monotonic() - t0, 3)
    return record


def aggregate(records: list[dict]) -> dict:
    done = [r for r in records if not r["errored"]]
    n = len(done)

    def mean(xs):
        xs = list(xs)
        return sum(xs) / len(xs) if xs else 0.0

    agg = {
        "attempted": n,
        "errored": len(records) - n,
        "solved": sum(1 for r in done if r["solved"]),
        "mean_fix_score": mean(r["score"]["fix_score"] for r in done),
        "mean_regression_rate": mean(r["score"]["regression_rate"] for r in done),
        "mean_localization_f1": mean(r["localization"]["f1"] for r in done),
        "strict_success_rate": mean(1.0 if r["score"]["strictly_correct"] else 0.0 for r in done),
    }
    rec = [r["retrieval"]["recall"] for r in done if "retrieval" in r]
    if rec:
        agg["mean_retrieval_recall"] = mean(rec)
    judged = [r["diagnosis_scores"] for r in done if r.get("diagnosis_scores")]
    if judged:
        agg["mean_soundness"] = mean(d["soundness"] for d in judged)
        agg["mean_completeness"] = mean(d["completeness"] for d in judged)
    return agg


def validate_report(report: dict) -> None:
    jsonschema.validate(report, REPORT_SCHEMA)


def run_dataset(
    root: str | Path,
    cfg: ModelConfig,
    strategy: Strategy | str = Strategy.FULL,
    parallel: int = 1,
    budget: int = DEFAULT_BUDGET,
    out: str | Path | None = None,
) -> dict:
    root = Path(root)
    strategy = Strategy(strategy)
    manifest = load_manifest(root)
    out = Path(out) if out else root / "report.json"
    transcripts = out.parent / "transcripts"
    scenarios = [root / s["path"] for s in manifest["scenarios"]]

    def one(path: Path) -> dict:
        return run_scenario(load_scenario(path), cfg, strategy, budget, transcripts)

    if parallel > 1:
        with ThreadPoolExecutor(parallel) as ex:
            records = list(ex.map(one, scenarios))
    else:
        records = [one(p) for p in scenarios]
    report = {
        "prompt_version": PROMPT_VERSION,
        "dataset": str(root),
        "model": cfg.model,
        "strategy": strategy.value,
        "budget_tokens": budget,
        "fuzzy_threshold": "max(2, ceil(0.05 * search characters))",
        "acl_flow_source": "loopback of the router whose predicate is evaluated",
        "scenarios": records,
        "aggregates": aggregate(records),
    }
    validate_report(report)
    dump_json(out, report)
    return report


def judge_report(report_path: str | Path, judges: list[ModelConfig]) -> dict:
    """Add diagnosis scores to every solved scenario of an existing report."""
    report_path = Path(report_path)
    report = json.loads(report_path.read_text())
    clients = [make_client(j) for j in judges]
    for rec in report["scenarios"]:
        if rec.get("errored"):
            continue
        sc = load_scenario(rec["path"])
        scores, reason = judge_diagnosis(rec.get("diagnosis", ""), sc.diff, clients)
        if scores is None:
            rec.pop("diagnosis_scores", None)
            rec["diagnosis_scores_omitted"] = reason
        else:
            rec["diagnosis_scores"] = scores.to_dict()
    report["aggregates"] = aggregate(report["scenarios"])
    validate_report(report)
    dump_json(report_path, report)
    return report
