"""Data-plane predicates mined from forwarding tables, violation sets and scoring."""

from __future__ import annotations

import ipaddress
from collections import deque
from dataclasses import dataclass, field

from netrepair.simulator import ACCEPT, FORWARD, ForwardingTable

SINK = "__sink__"
KINDS = ("Reachability", "Isolation", "Waypoint", "LoadBalancing")
_KIND_ORDER = {k: i for i, k in enumerate(KINDS)}


class ScoreError(ValueError):
    pass


@dataclass(frozen=True)
class Predicate:
    kind: str
    router: str
    prefix: str
    waypoint: str | None = None
    paths: int | None = None

    def __post_init__(self):
        if self.kind not in _KIND_ORDER:
            raise ValueError(f"unknown predicate kind {self.kind!r}")
        if self.kind == "Waypoint" and (self.waypoint is None or self.waypoint == self.router):
            raise ValueError("a waypoint must name a router other than the source")
        if self.kind == "LoadBalancing" and (self.paths is None or self.paths < 2):
            raise ValueError("load balancing needs at least two paths")

    def sort_key(self):
        net = ipaddress.IPv4Network(self.prefix)
        return (int(net.network_address), net.prefixlen, self.router, _KIND_ORDER[self.kind],
                self.waypoint or "", self.paths or 0)

    def __str__(self) -> str:
        args = [self.router, self.prefix]
        if self.waypoint is not None:
            args.append(self.waypoint)
        if self.paths is not None:
            args.append(str(self.paths))
        return f"{self.kind}({','.join(args)})"

    def to_dict(self) -> dict:
        d = {"type": self.kind, "router": self.router, "prefix": self.prefix}
        if self.waypoint is not None:
            d["waypoint"] = self.waypoint
        if self.paths is not None:
            d["paths"] = self.paths
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "Predicate":
        return cls(d["type"], d["router"], d["prefix"], d.get("waypoint"), d.get("paths"))


@dataclass(frozen=True)
class MiningOptions:
    # Emit Reachability for routers that own the prefix (they accept locally).
    include_owners: bool = True
    # Drop Waypoint(r, p, w) when w is an owner of p.
    suppress_owner_waypoints: bool = False

    def to_dict(self) -> dict:
        return {"include_owners": self.include_owners, "suppress_owner_waypoints": self.suppress_owner_waypoints}


@dataclass
class PredicateSet:
    predicates: frozenset = frozenset()
    tag: str = "golden"
    options: MiningOptions = field(default_factory=MiningOptions)

    def __post_init__(self):
        self.predicates = frozenset(self.predicates)

    def __iter__(self):
        return iter(self.sorted())

    def __len__(self) -> int:
        return len(self.predicates)

    def __contains__(self, item) -> bool:
        return item in self.predicates

    def sorted(self) -> list[Predicate]:
        return sorted(self.predicates, key=Predicate.sort_key)

    def derive(self, predicates, tag: str) -> "PredicateSet":
        return PredicateSet(frozenset(predicates), tag, self.options)

    def by_kind(self) -> dict[str, int]:
        out = {k: 0 for k in KINDS}
        for p in self.predicates:
            out[p.kind] += 1
        return out

    def to_dict(self) -> dict:
        return {
            "tag": self.tag,
            "options": self.options.to_dict(),
            "counts": self.by_kind(),
            "predicates": [p.to_dict() for p in self.sorted()],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PredicateSet":
        opts = MiningOptions(**d.get("options", {}))
        return cls(frozenset(Predicate.from_dict(p) for p in d["predicates"]), d.get("tag", "golden"), opts)


@dataclass
class ScoreReport:
    violations: PredicateSet
    fixed: PredicateSet
    unfixed: PredicateSet
    regressed: PredicateSet
    fix_score: float
    regression_rate: float
    strictly_correct: bool

    def to_dict(self) -> dict:
        return {
            "violations": len(self.violations),
            "fixed": [str(p) for p in self.fixed],
            "unfixed": [str(p) for p in self.unfixed],
            "regressed": [str(p) for p in self.regressed],
            "fix_score": self.fix_score,
            "regression_rate": self.regression_rate,
            "strictly_correct": self.strictly_correct,
        }


# -- graphs ------------------------------------------------------------------


def _dst(prefix: str) -> str:
    return str(ipaddress.IPv4Network(prefix).network_address)


def forwarding_graph(table: ForwardingTable, p: str, src: str | None = None) -> dict[str, set[str]]:
    """Directed successor map for prefix ``p`` with a virtual sink for local acceptance.

    Hops whose bound ACLs deny the canonical flow (``src`` loopback to the first
    address of ``p``) are left out.
    """
    dst = _dst(p)
    succ: dict[str, set[str]] = {r: set() for r in table.routers}
    succ[SINK] = set()
    for r in table.routers:
        act = table.action(r, p)
        if act.kind == ACCEPT:
            succ[r].add(SINK)
        elif act.kind == FORWARD:
            for s in act.next_routers:
                if s in succ and table.hop_permits(r, s, src, dst):
                    succ[r].add(s)
    return succ


def delivering_nodes(succ: dict[str, set[str]]) -> set[str]:
    pred: dict[str, list[str]] = {n: [] for n in succ}
    for u, vs in succ.items():
        for v in vs:
            pred[v].append(u)
    seen = {SINK}
    queue = deque([SINK])
    while queue:
        for u in pred[queue.popleft()]:
            if u not in seen:
                seen.add(u)
                queue.append(u)
    seen.discard(SINK)
    return seen


def postdominators(succ: dict[str, set[str]], live: set[str]) -> dict[str, str]:
    """Immediate post-dominator (toward the sink) of every delivering node.

    Dominators of the reversed delivering subgraph rooted at the sink, by the
    iterative intersection scheme over a reverse postorder.
    """
    nodes = live | {SINK}
    pred: dict[str, list[str]] = {n: [] for n in nodes}
    for u in live:
        for v in succ[u]:
            if v in nodes:
                pred[v].append(u)
    order: list[str] = []
    seen = {SINK}
    stack = [(SINK, iter(sorted(pred[SINK])))]
    while stack:
        node, it = stack[-1]
        for nxt in it:
            if nxt not in seen:
                seen.add(nxt)
                stack.append((nxt, iter(sorted(pred[nxt]))))
                break
        else:
            order.append(node)
            stack.pop()
    rpo = list(reversed(order))
    idx = {n: i for i, n in enumerate(rpo)}
    idom = {SINK: SINK}

    def intersect(a: str, b: str) -> str:
        while a != b:
            while idx[a] > idx[b]:
                a = idom[a]
            while idx[b] > idx[a]:
                b = idom[b]
        return a

    changed = True
    while changed:
        changed = False
        for n in rpo[1:]:
            ps = [s for s in succ[n] if s in idom]
            if not ps:
                continue
            new = ps[0]
            for q in ps[1:]:
                new = intersect(q, new)
            if idom.get(n) != new:
                idom[n] = new
                changed = True
    return idom


def max_flow_to_sink(succ: dict[str, set[str]], live: set[str], source: str) -> int:
    """Edge-disjoint paths from ``source`` to the sink (unit router-to-router capacities).

    Edges into the sink are uncapacitated, so paths may share the final accepting
    router. Breadth-first augmenting paths over the residual graph.
    """
    nodes = live | {SINK}
    cap: dict[tuple[str, str], int] = {}
    adj: dict[str, set[str]] = {n: set() for n in nodes}
    for u in live:
        for v in succ[u]:
            if v not in nodes:
                continue
            c = len(live) + 1 if v == SINK else 1
            cap[(u, v)] = cap.get((u, v), 0) + c
            cap.setdefault((v, u), 0)
            adj[u].add(v)
            adj[v].add(u)
    flow = 0
    limit = len([v for v in succ[source] if v in nodes])
    while flow < limit:
        parent = {source: None}
        queue = deque([source])
        while queue and SINK not in parent:
            u = queue.popleft()
            for v in sorted(adj[u]):
                if v not in parent and cap[(u, v)] > 0:
                    parent[v] = u
                    queue.append(v)
        if SINK not in parent:
            break
        v = SINK
        while parent[v] is not None:
            u = parent[v]
            cap[(u, v)] -= 1
            cap[(v, u)] += 1
            v = u
        flow += 1
    return flow


# -- mining ------------------------------------------------------------------


def _mine_graph(succ, p: str, routers, owners: set[str], opts: MiningOptions) -> set[Predicate]:
    live = delivering_nodes(succ)
    idom = postdominators(succ, live)
    out: set[Predicate] = set()
    for r in routers:
        if r in owners and not opts.include_owners:
            continue
        if r not in live:
            out.add(Predicate("Isolation", r, p))
            continue
        out.add(Predicate("Reachability", r, p))
        w = idom.get(r)
        while w is not None and w != SINK:
            if not (opts.suppress_owner_waypoints and w in owners):
                out.add(Predicate("Waypoint", r, p, waypoint=w))
            w = idom[w]
        if len([v for v in succ[r] if v in live or v == SINK]) >= 2:
            n = max_flow_to_sink(succ, live, r)
            if n >= 2:
                out.add(Predicate("LoadBalancing", r, p, paths=n))
    return out


def _src_dependent(table: ForwardingTable, p: str) -> bool:
    if not table.hop_acls:
        return False
    for r in table.routers:
        act = table.action(r, p)
        if act.kind == FORWARD and any(table.hop_src_dependent(r, s) for s in act.next_routers):
            return True
    return False


def mine_prefix(table: ForwardingTable, p: str, opts: MiningOptions | None = None) -> set[Predicate]:
    opts = opts or MiningOptions()
    owners = {r for r in table.routers if table.action(r, p).kind == ACCEPT}
    if not _src_dependent(table, p):
        return _mine_graph(forwarding_graph(table, p), p, table.routers, owners, opts)
    out: set[Predicate] = set()
    for r in table.routers:
        succ = forwarding_graph(table, p, table.loopbacks.get(r))
        out |= _mine_graph(succ, p, [r], owners, opts)
    return out


def mine_predicates(table: ForwardingTable, opts: MiningOptions | None = None, tag: str = "golden") -> PredicateSet:
    """Mine Reachability, Isolation, Waypoint and LoadBalancing predicates over the prefix universe."""
    opts = opts or MiningOptions()
    preds: set[Predicate] = set()
    for p in table.universe:
        preds |= mine_prefix(table, p, opts)
    return PredicateSet(frozenset(preds), tag, opts)


def _changed_prefixes(golden_table: ForwardingTable, other: ForwardingTable) -> list[str]:
    if golden_table.hop_acls != other.hop_acls or golden_table.routers != other.routers:
        return list(other.universe)
    return [p for p in other.universe if golden_table.prefix_signature(p) != other.prefix_signature(p)]


def diff_violations(
    golden: PredicateSet,
    other: ForwardingTable,
    golden_table: ForwardingTable | None = None,
    tag: str = "violations",
) -> PredicateSet:
    """Golden predicates that ``other`` no longer satisfies.

    With ``golden_table`` given, only prefixes whose forwarding entries changed are
    re-mined; everything else is known to still hold.
    """
    by_prefix: dict[str, set[Predicate]] = {}
    for ph in golden.predicates:
        by_prefix.setdefault(ph.prefix, set()).add(ph)
    if golden_table is not None:
        prefixes = _changed_prefixes(golden_table, other)
    else:
        prefixes = sorted(by_prefix)
    violated: set[Predicate] = set()
    for p in prefixes:
        if p not in by_prefix:
            continue
        mined = mine_prefix(other, p, golden.options) if p in other.universe else set()
        violated |= by_prefix[p] - mined
    return golden.derive(violated, tag)


def score_sets(golden: PredicateSet, v: PredicateSet, fix_violations: PredicateSet) -> ScoreReport:
    if not v.predicates <= golden.predicates:
        raise ScoreError("violation set is not a subset of the golden specification")
    fixed = v.predicates - fix_violations.predicates
    unfixed = v.predicates & fix_violations.predicates
    regressed = fix_violations.predicates - v.predicates
    denom = len(fixed) + len(unfixed) + len(regressed)
    fix_score = len(fixed) / denom if denom else 1.0
    regression_rate = len(regressed) / denom if denom else 0.0
    return ScoreReport(
        violations=v,
        fixed=golden.derive(fixed, "fixed"),
        unfixed=golden.derive(unfixed, "unfixed"),
        regressed=golden.derive(regressed, "regressed"),
        fix_score=fix_score,
        regression_rate=regression_rate,
        strictly_correct=not unfixed and not regressed,
    )


def score(
    golden: PredicateSet,
    v: PredicateSet,
    fix_table: ForwardingTable,
    golden_table: ForwardingTable | None = None,
) -> ScoreReport:
    """Score a repaired network against the golden predicates and the violation set.

    Raises:
        ScoreError: if ``v`` is not a subset of ``golden``.
    """
    if not v.predicates <= golden.predicates:
        raise ScoreError("violation set is not a subset of the golden specification")
    return score_sets(golden, v, diff_violations(golden, fix_table, golden_table, tag="fix"))
