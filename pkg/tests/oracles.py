"""Independent brute-force references used to check the production algorithms."""

from __future__ import annotations

import itertools

SINK = "__sink__"


def simple_paths(succ: dict[str, set[str]], src: str, dst: str = SINK) -> list[list[str]]:
    out = []

    def walk(node, path, seen):
        if node == dst:
            out.append(path)
            return
        for nxt in sorted(succ.get(node, ())):
            if nxt not in seen:
                walk(nxt, path + [nxt], seen | {nxt})

    walk(src, [src], {src})
    return out


def dfs_max_flow(succ: dict[str, set[str]], src: str, dst: str = SINK) -> int:
    """Unit capacities on router edges, unbounded capacity into ``dst``; plain DFS augmentation.

    A source that delivers locally has a single path, so its own edge into ``dst`` stays at 1.
    """
    cap: dict[tuple[str, str], int] = {}
    for a, outs in succ.items():
        for b in outs:
            cap[(a, b)] = 10**6 if b == dst and a != src else 1
    flow = 0
    while True:
        parent = {src: None}
        stack = [src]
        while stack and dst not in parent:
            u = stack.pop()
            for (a, b), c in list(cap.items()):
                if a == u and c > 0 and b not in parent:
                    parent[b] = a
                    stack.append(b)
        if dst not in parent:
            return flow
        v = dst
        while parent[v] is not None:
            u = parent[v]
            cap[(u, v)] -= 1
            cap[(v, u)] = cap.get((v, u), 0) + 1
            v = u
        flow += 1


def brute_force_predicates(succ: dict[str, set[str]], routers, prefix: str, owners=frozenset()):
    """(kind, router, extra) triples that a correct miner emits for one prefix."""
    out = set()
    for r in routers:
        paths = simple_paths(succ, r)
        if not paths:
            out.add(("Isolation", r, None))
            continue
        out.add(("Reachability", r, None))
        common = set.intersection(*(set(p) for p in paths)) - {r, SINK}
        for w in common:
            out.add(("Waypoint", r, w))
        n = dfs_max_flow(succ, r)
        if n >= 2:
            out.add(("LoadBalancing", r, n))
    return out


def all_k_subsets_cover(kinds, k):
    return list(itertools.combinations(kinds, k))
