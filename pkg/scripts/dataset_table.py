"""Print the per-tier size and fault-impact table of a generated dataset.

    netrepair gen --topologies src/netrepair/data/topologies --out ds --seed 0
    python3 scripts/dataset_table.py ds
"""

import argparse
import json
from collections import defaultdict
from pathlib import Path

from netrepair.orchestrator import dataset_stats
from netrepair.orchestrator.stats import COLUMNS, summarize


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("dataset")
    ap.add_argument("--json", action="store_true", help="emit JSON instead of a text table")
    a = ap.parse_args()

    root = Path(a.dataset)
    stats = dataset_stats(root)
    manifest = json.loads((root / "manifest.json").read_text())
    tier_of = {s["path"]: s["tier"] for s in manifest["scenarios"]}
    groups = defaultdict(list)
    for sid, row in stats["scenarios"].items():
        groups[tier_of[sid]].append(row)
        groups["all"].append(row)
    table = {g: summarize(rows) | {"count": len(rows)} for g, rows in groups.items()}
    if a.json:
        print(json.dumps(table, indent=1, sort_keys=True))
        return

    order = [g for g in ("small", "medium", "large", "all") if g in table]
    print(f"{'column':24s}" + "".join(f"{g:>20s}" for g in order))
    print(f"{'scenarios':24s}" + "".join(f"{table[g]['count']:>20d}" for g in order))
    for c in COLUMNS:
        cells = "".join(f"{table[g][c]['mean']:>11.1f} / {table[g][c]['max']:<6.4g}" for g in order)
        print(f"{c:24s}{cells}")
    print(f"failures: {stats['failures']} of {manifest['expected_scenarios']}")


if __name__ == "__main__":
    main()
