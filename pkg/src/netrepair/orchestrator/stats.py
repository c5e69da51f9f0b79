"""Dataset statistics: per-scenario size and fault-impact figures with mean/max aggregates."""

from __future__ import annotations

import json
from pathlib import Path

from netrepair.orchestrator.pipeline import load_manifest

COLUMNS = (
    "nodes",
    "loc",
    "routes",
    "predicates",
    "lines_edited",
    "routers_affected",
    "routes_changed",
    "predicates_changed",
    "loc_pct_changed",
    "routes_pct_changed",
    "predicates_pct_changed",
)


def scenario_row(meta: dict) -> dict:
    s = meta["stats"]
    row = {k: s[k] for k in COLUMNS[:8]}

    def pct(a, b):
        return 100.0 * a / b if b else 0.0

    row["loc_pct_changed"] = pct(s["lines_edited"], s["loc"])
    row["routes_pct_changed"] = pct(s["routes_changed"], s["routes"])
    row["predicates_pct_changed"] = pct(s["predicates_changed"], s["predicates"])
    return row


def summarize(rows: list[dict]) -> dict:
    if not rows:
        return {}
    return {c: {"mean": sum(r[c] for r in rows) / len(rows), "max": max(r[c] for r in rows)} for c in COLUMNS}


def dataset_stats(root: str | Path) -> dict:
    root = Path(root)
    manifest = load_manifest(root)
    per = {}
    for entry in manifest["scenarios"]:
        meta = json.loads((root / entry["path"] / "metadata.json").read_text())
        per[entry["path"]] = scenario_row(meta)
    return {"scenarios": per, "aggregate": summarize(list(per.values())), "failures": len(manifest.get("failures", []))}
