"""Regenerate the bundled sample topologies under src/netrepair/data/topologies/.

Abilene is written from its published link list; the others are seeded
Waxman-style graphs made connected by a random spanning tree.
"""

import argparse
import math
import random
from pathlib import Path

ABILENE = {
    "nodes": ["NewYork", "Chicago", "WashingtonDC", "Seattle", "Sunnyvale", "LosAngeles",
              "Denver", "KansasCity", "Houston", "Atlanta", "Indianapolis"],
    "edges": [("NewYork", "Chicago"), ("NewYork", "WashingtonDC"), ("Chicago", "Indianapolis"),
              ("WashingtonDC", "Atlanta"), ("Atlanta", "Indianapolis"), ("Atlanta", "Houston"),
              ("Indianapolis", "KansasCity"), ("Houston", "KansasCity"), ("Houston", "LosAngeles"),
              ("KansasCity", "Denver"), ("Denver", "Sunnyvale"), ("Denver", "Seattle"),
              ("Seattle", "Sunnyvale"), ("Sunnyvale", "LosAngeles")],
}

SYNTHETIC = [("metro20", 20, 1), ("regional56", 56, 2), ("backbone120", 120, 3)]


def waxman(n: int, seed: int, alpha: float = 0.9, beta: float = 0.15):
    rng = random.Random(seed)
    pts = [(rng.random(), rng.random()) for _ in range(n)]
    names = [f"N{i:03d}" for i in range(n)]
    edges = set()
    order = list(range(n))
    rng.shuffle(order)
    for k in range(1, n):
        a, b = order[k], order[rng.randrange(k)]
        edges.add((min(a, b), max(a, b)))
    diag = math.sqrt(2)
    for a in range(n):
        for b in range(a + 1, n):
            if rng.random() < alpha * math.exp(-math.dist(pts[a], pts[b]) / (beta * diag)) / 3:
                edges.add((a, b))
    return {"nodes": names, "edges": sorted((names[a], names[b]) for a, b in edges)}


def to_gml(graph: dict) -> str:
    ids = {name: i for i, name in enumerate(graph["nodes"])}
    out = ["graph [", "  directed 0"]
    for name, i in ids.items():
        out += ["  node [", f"    id {i}", f'    label "{name}"', "  ]"]
    for a, b in graph["edges"]:
        out += ["  edge [", f"    source {ids[a]}", f"    target {ids[b]}", "  ]"]
    return "\n".join(out + ["]"]) + "\n"


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default=str(Path(__file__).resolve().parent.parent / "src/netrepair/data/topologies"))
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "abilene.gml").write_text(to_gml(ABILENE))
    for name, n, seed in SYNTHETIC:
        (out / f"{name}.gml").write_text(to_gml(waxman(n, seed)))
        print(name, n)


if __name__ == "__main__":
    main()
