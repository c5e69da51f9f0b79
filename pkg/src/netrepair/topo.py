"""Topology ingestion, validation and size tiers."""

from __future__ import annotations

import enum
import json
import logging
import re
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path

logger = logging.getLogger(__name__)

Endpoint = tuple[str, int]
Link = tuple[str, int, str, int]


class TopologyError(ValueError):
    pass


class Tier(str, enum.Enum):
    SMALL = "small"
    MEDIUM = "medium"
    LARGE = "large"


@dataclass(frozen=True)
class Topology:
    """Undirected router graph; every link joins two (router, interface-id) endpoints."""

    name: str
    routers: tuple[str, ...]
    links: tuple[Link, ...]
    _adj: dict = field(default=None, compare=False, repr=False, hash=False)

    def __post_init__(self):
        routers = tuple(sorted(set(self.routers)))
        links = tuple(sorted(_canonical_link(*l) for l in self.links))
        object.__setattr__(self, "routers", routers)
        object.__setattr__(self, "links", links)
        _validate(self)
        adj: dict[str, dict[int, Endpoint]] = {r: {} for r in routers}
        for a, ia, b, ib in links:
            adj[a][ia] = (b, ib)
            adj[b][ib] = (a, ia)
        object.__setattr__(self, "_adj", adj)

    def __len__(self) -> int:
        return len(self.routers)

    def interfaces(self, router: str) -> dict[int, Endpoint]:
        """Map interface-id -> remote (router, interface-id)."""
        return self._adj[router]

    def neighbors(self, router: str) -> list[str]:
        return sorted({peer for peer, _ in self._adj[router].values()})

    def degree(self, router: str) -> int:
        return len(self._adj[router])

    def peer_of(self, router: str, ifid: int) -> Endpoint | None:
        return self._adj[router].get(ifid)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "routers": list(self.routers),
            "links": [list(l) for l in self.links],
        }


def _canonical_link(a: str, ia: int, b: str, ib: int) -> Link:
    return (a, int(ia), b, int(ib)) if (a, ia) <= (b, ib) else (b, int(ib), a, int(ia))


def _validate(t: Topology) -> None:
    if not t.routers:
        raise TopologyError("empty topology")
    known = set(t.routers)
    seen_endpoints: set[Endpoint] = set()
    seen_pairs: set[tuple] = set()
    for a, ia, b, ib in t.links:
        if a not in known or b not in known:
            raise TopologyError(f"link references unknown router: {a}-{b}")
        if a == b:
            raise TopologyError(f"self-loop on {a}")
        pair = ((a, ia), (b, ib))
        if pair in seen_pairs:
            raise TopologyError(f"duplicate link {a}:{ia}-{b}:{ib}")
        seen_pairs.add(pair)
        for ep in pair:
            if ep in seen_endpoints:
                raise TopologyError(f"endpoint {ep[0]}:{ep[1]} used by more than one link")
            seen_endpoints.add(ep)
    if not is_connected(t.routers, [(a, b) for a, _, b, _ in t.links]):
        raise TopologyError("disconnected graph")


def is_connected(nodes, edges) -> bool:
    nodes = list(nodes)
    if not nodes:
        return True
    adj: dict[str, set[str]] = {n: set() for n in nodes}
    for a, b in edges:
        if a in adj and b in adj:
            adj[a].add(b)
            adj[b].add(a)
    seen = {nodes[0]}
    queue = deque([nodes[0]])
    while queue:
        for nxt in adj[queue.popleft()]:
            if nxt not in seen:
                seen.add(nxt)
                queue.append(nxt)
    return len(seen) == len(nodes)


def classify_tier(t: Topology | int) -> Tier:
    n = t if isinstance(t, int) else len(t)
    if n < 1:
        raise ValueError("node count must be positive")
    if n < 50:
        return Tier.SMALL
    if n <= 100:
        return Tier.MEDIUM
    return Tier.LARGE


# -- GML ---------------------------------------------------------------------

_GML_TOKEN = re.compile(r'\s*(?:(\[)|(\])|"((?:[^"\\]|\\.)*)"|([^\s\[\]"]+))')


def _parse_gml(text: str) -> dict:
    pos = 0
    tokens: list[tuple[str, str]] = []
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _GML_TOKEN.match(text, pos)
        if not m:
            raise TopologyError(f"GML parse failure at offset {pos}")
        pos = m.end()
        if m.group(1):
            tokens.append(("[", "["))
        elif m.group(2):
            tokens.append(("]", "]"))
        elif m.group(3) is not None:
            tokens.append(("str", m.group(3)))
        else:
            tokens.append(("atom", m.group(4)))
    it = iter(tokens)

    def parse_list(closing: bool) -> list:
        items: list = []
        for kind, key in it:
            if kind == "]":
                if not closing:
                    raise TopologyError("GML parse failure: unbalanced ']'")
                return items
            if kind != "atom":
                raise TopologyError(f"GML parse failure: expected key, got {key!r}")
            try:
                vkind, value = next(it)
            except StopIteration:
                raise TopologyError(f"GML parse failure: key {key!r} without value") from None
            if vkind == "[":
                items.append((key, parse_list(True)))
            elif vkind == "]":
                raise TopologyError("GML parse failure: unexpected ']'")
            else:
                items.append((key, value))
        if closing:
            raise TopologyError("GML parse failure: unterminated '['")
        return items

    top = parse_list(False)
    graphs = [v for k, v in top if k == "graph" and isinstance(v, list)]
    if len(graphs) != 1:
        raise TopologyError("GML parse failure: expected exactly one graph")
    return graphs[0]


def sanitize_name(label: str) -> str:
    name = re.sub(r"[^a-z0-9]+", "-", label.lower()).strip("-")
    return name


def _topology_from_gml(text: str, default_name: str | None) -> Topology:
    graph = _parse_gml(text)
    name = default_name
    nodes: list[tuple[str, str]] = []
    edges: list[tuple[str, str]] = []
    for key, value in graph:
        if key in ("label", "Network") and isinstance(value, str) and name is None:
            name = sanitize_name(value) or None
        elif key == "node":
            attrs = dict(item for item in value if not isinstance(item[1], list))
            if "id" not in attrs:
                raise TopologyError("GML parse failure: node without id")
            nodes.append((attrs["id"], attrs.get("label", "")))
        elif key == "edge":
            attrs = dict(item for item in value if not isinstance(item[1], list))
            if "source" not in attrs or "target" not in attrs:
                raise TopologyError("GML parse failure: edge without endpoints")
            edges.append((attrs["source"], attrs["target"]))
    names: dict[str, str] = {}
    used: set[str] = set()
    for node_id, label in sorted(nodes, key=lambda n: _id_key(n[0])):
        if node_id in names:
            raise TopologyError(f"GML parse failure: duplicate node id {node_id}")
        base = sanitize_name(label) or f"node{sanitize_name(node_id)}"
        candidate, suffix = base, 2
        while candidate in used:
            candidate = f"{base}-{suffix}"
            suffix += 1
        used.add(candidate)
        names[node_id] = candidate
    pairs: set[tuple[str, str]] = set()
    for src, dst in edges:
        if src not in names or dst not in names:
            raise TopologyError(f"GML parse failure: edge {src}-{dst} references unknown node")
        a, b = names[src], names[dst]
        if a == b:
            raise TopologyError(f"self-loop on {a}")
        pair = tuple(sorted((a, b)))
        if pair in pairs:
            logger.warning("collapsing parallel edge %s-%s", *pair)
            continue
        pairs.add(pair)
    return _assign_interfaces(name or "topology", sorted(names.values()), sorted(pairs))


def _id_key(node_id: str):
    return (0, int(node_id), "") if node_id.lstrip("-").isdigit() else (1, 0, node_id)


def _assign_interfaces(name: str, routers: list[str], pairs: list[tuple[str, str]]) -> Topology:
    nbrs: dict[str, list[str]] = {r: [] for r in routers}
    for a, b in pairs:
        nbrs[a].append(b)
        nbrs[b].append(a)
    ifid = {r: {peer: i + 1 for i, peer in enumerate(sorted(ps))} for r, ps in nbrs.items()}
    links = [(a, ifid[a][b], b, ifid[b][a]) for a, b in pairs]
    return Topology(name, tuple(routers), tuple(links))


def _topology_from_native(doc: dict) -> Topology:
    try:
        name = str(doc["name"])
        routers = [str(r) for r in doc["routers"]]
        raw_links = doc["links"]
    except (KeyError, TypeError) as exc:
        raise TopologyError(f"parse failure: missing field {exc}") from None
    if len(set(routers)) != len(routers):
        raise TopologyError("parse failure: duplicate router name")
    links = []
    for entry in raw_links:
        if len(entry) != 4:
            raise TopologyError(f"parse failure: malformed link {entry!r}")
        a, ia, b, ib = entry
        if a == b:
            raise TopologyError(f"self-loop on {a}")
        links.append((str(a), int(ia), str(b), int(ib)))
    return Topology(name, tuple(routers), tuple(links))


def load_topology(source: str | bytes | Path | dict, name: str | None = None) -> Topology:
    """Load a topology from a GML document, a native JSON document, or a path to either.

    Raises:
        TopologyError: on parse failure, self-loops, duplicate links or a
            disconnected graph.
    """
    if isinstance(source, dict):
        return _topology_from_native(source)
    if isinstance(source, Path):
        return load_topology(source.read_bytes(), name=name or sanitize_name(source.stem))
    text = source.decode("utf-8") if isinstance(source, bytes) else source
    stripped = text.lstrip()
    if stripped.startswith("{"):
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise TopologyError(f"parse failure: {exc}") from None
        return _topology_from_native(doc)
    lines = [l for l in text.splitlines() if not l.lstrip().startswith("#")]
    return _topology_from_gml("\n".join(lines), name)


def bundled_topology_dir() -> Path:
    return Path(__file__).parent / "data" / "topologies"


def load_directory(path: str | Path) -> dict[str, Topology]:
    """Load every *.gml / *.json topology in a directory, keyed by topology name."""
    out: dict[str, Topology] = {}
    for p in sorted(Path(path).iterdir()):
        if p.suffix.lower() not in (".gml", ".json"):
            continue
        topo = load_topology(p)
        if topo.name in out:
            raise TopologyError(f"duplicate topology name {topo.name!r} in {path}")
        out[topo.name] = topo
    return out
