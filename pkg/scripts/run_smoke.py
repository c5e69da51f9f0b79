"""Generate a small dataset from the bundled topologies with at most 20 nodes and
run the perfect and null scripted solvers over it.

    python3 scripts/run_smoke.py --out /tmp/smoke --size 30
"""

import argparse
import json
import time

from netrepair.harness import ModelConfig
from netrepair.orchestrator import dataset_stats, generate_dataset, run_dataset
from netrepair.topo import bundled_topology_dir, load_directory


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default="smoke-dataset")
    ap.add_argument("--size", type=int, default=30)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--max-nodes", type=int, default=20)
    a = ap.parse_args()

    tops = {n: t for n, t in load_directory(bundled_topology_dir()).items() if len(t.routers) <= a.max_nodes}
    t0 = time.perf_counter()
    m = generate_dataset(tops, a.out, a.seed, stratify=False, limit=a.size)
    gen_s = time.perf_counter() - t0
    print(f"generated {len(m['scenarios'])} scenarios ({len(m['failures'])} failures) in {gen_s:.1f}s")

    for kind in ("perfect", "null"):
        t0 = time.perf_counter()
        rep = run_dataset(a.out, ModelConfig(kind, kind=kind), "full", out=f"{a.out}/report-{kind}.json")
        agg = rep["aggregates"]
        print(f"{kind:8s} fix={agg['mean_fix_score']:.3f} regr={agg['mean_regression_rate']:.3f} "
              f"f1={agg['mean_localization_f1']:.3f} strict={agg['strict_success_rate']:.3f} "
              f"({time.perf_counter() - t0:.1f}s)")
    print(json.dumps(dataset_stats(a.out)["aggregate"], indent=1))


if __name__ == "__main__":
    main()
