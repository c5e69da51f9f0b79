"""Dataset generation, evaluation runs, scoring and statistics."""

from netrepair.orchestrator.evaluate import judge_report, run_dataset, score_directory, score_fix, validate_report
from netrepair.orchestrator.pipeline import (
    GenerationError,
    LoadedScenario,
    Scenario,
    build_scenario,
    generate_dataset,
    load_manifest,
    load_scenario,
    load_topologies,
    tier_pools,
    write_scenario,
)
from netrepair.orchestrator.stats import COLUMNS, dataset_stats

__all__ = [
    "COLUMNS", "GenerationError", "LoadedScenario", "Scenario", "build_scenario", "dataset_stats",
    "generate_dataset", "judge_report", "load_manifest", "load_scenario", "load_topologies", "run_dataset",
    "score_directory", "score_fix", "tier_pools", "validate_report", "write_scenario",
]
