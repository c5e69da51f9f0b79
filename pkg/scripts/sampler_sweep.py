"""How many multi-fault sets the pairwise greedy needs, across seeds."""

import argparse
import statistics
import time

from netrepair.faults import CATALOG, kind_pair_feasible
from netrepair.sampler import coverage, pairwise_greedy


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--seeds", type=int, default=100)
    ap.add_argument("--kinds", type=int, default=len(CATALOG), help="use the first N catalog kinds")
    a = ap.parse_args()

    kinds = [k.id for k in CATALOG][: a.kinds]
    counts, sizes = [], []
    t0 = time.perf_counter()
    for s in range(a.seeds):
        col = pairwise_greedy(kinds, kind_pair_feasible, s)
        assert coverage(col, kind_pair_feasible) == 1.0
        counts.append(len(col.multi_sets))
        sizes += [len(x) for x in col.multi_sets]
    dt = (time.perf_counter() - t0) / a.seeds
    print(f"{len(kinds)} kinds, {a.seeds} seeds: multi-sets min {min(counts)} median {statistics.median(counts)} "
          f"max {max(counts)}; mean set size {statistics.mean(sizes):.2f}; {dt * 1000:.1f} ms per run")


if __name__ == "__main__":
    main()
