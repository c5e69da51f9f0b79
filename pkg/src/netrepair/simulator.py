"""Control- and data-plane simulation over parsed device models.

Routes are computed in layers: connected, IGP (OSPF and IS-IS), static, BGP to a
fixpoint, then OSPF externals from BGP redistribution. The resulting RIB is
resolved into a per-(router, prefix) forwarding action; ACL verdicts are kept
separately and applied per hop when a forwarding graph is built.
"""

from __future__ import annotations

import heapq
import ipaddress
import logging
from collections import deque
from functools import lru_cache
from dataclasses import dataclass, field

from netrepair.configtext.model import AclRule, DeviceModel, ethernet
from netrepair.topo import Topology

logger = logging.getLogger(__name__)

ADMIN_DISTANCE = {
    "connected": 0,
    "static": 1,
    "ebgp": 20,
    "ospf": 110,
    "ospf-external": 110,
    "isis": 115,
    "ibgp": 200,
}
DEFAULT_OSPF_COST = 10
LOOPBACK_OSPF_COST = 1
ISIS_METRIC = 10
DEFAULT_LOCAL_PREF = 100
MAX_RESOLVE_DEPTH = 8

FORWARD = "forward"
DROP = "drop"
ACCEPT = "accept"


class DivergenceError(RuntimeError):
    pass


@lru_cache(maxsize=None)
def _pkey(prefix: str) -> tuple[int, int]:
    net = ipaddress.IPv4Network(prefix, strict=False)
    return int(net.network_address), net.prefixlen


def _pstr(key: tuple[int, int]) -> str:
    return f"{ipaddress.IPv4Address(key[0])}/{key[1]}"


@lru_cache(maxsize=None)
def _aint(addr: str) -> int:
    return int(ipaddress.IPv4Address(addr))


_MASKS = [(0xFFFFFFFF << (32 - n)) & 0xFFFFFFFF for n in range(33)]


@dataclass(frozen=True)
class Action:
    kind: str
    next_routers: frozenset = frozenset()

    def to_json(self):
        if self.kind == FORWARD:
            return {"action": FORWARD, "to": sorted(self.next_routers)}
        return {"action": self.kind}


ACTION_DROP = Action(DROP)
ACTION_ACCEPT = Action(ACCEPT)


@dataclass(frozen=True)
class RouteEntry:
    prefix: str
    protocol: str
    igp_metric: int = 0
    local_pref: int | None = None
    as_path_length: int = 0
    origin_router_id: str | None = None
    next_hop: str | None = None
    learned_from: str | None = None
    next_routers: frozenset = frozenset()
    interface: str | None = None

    @property
    def distance(self) -> int:
        return ADMIN_DISTANCE[self.protocol]


@dataclass(frozen=True)
class _Path:
    """A BGP path as held in adj-RIB-in / loc-RIB."""

    prefix: str
    as_path: tuple = ()
    local_pref: int | None = DEFAULT_LOCAL_PREF
    next_hop: str | None = None
    originator: str | None = None
    cluster_list: tuple = ()
    peer: str | None = None
    peer_addr: str | None = None
    peer_rid: str | None = None
    ebgp: bool = False

    @property
    def local(self) -> bool:
        return self.peer is None


@dataclass(frozen=True)
class BgpSession:
    a: str
    b: str
    a_addr: str
    b_addr: str
    ebgp: bool


# -- per-router static facts ---------------------------------------------------


class _Router:
    def __init__(self, dev: DeviceModel):
        self.dev = dev
        self.addresses = {_aint(i.ip) for i in dev.interfaces if i.ip}
        self.loop_nets = [
            (_aint(i.ip) & _MASKS[i.mask_len], i.mask_len)
            for i in dev.interfaces
            if i.ip and i.is_loopback and i.mask_len is not None
        ]
        self.rib: dict[tuple[int, int], RouteEntry] = {}
        lo0 = dev.interface("Loopback0")
        lo_ips = [i.ip for i in dev.interfaces if i.is_loopback and i.ip]
        self.loopback = lo0.ip if lo0 is not None and lo0.ip else (max(lo_ips, key=_aint) if lo_ips else None)
        self.ospf_rid = None
        if dev.ospf is not None:
            self.ospf_rid = dev.ospf.router_id or self.loopback
        self.bgp_rid = None
        if dev.bgp is not None:
            self.bgp_rid = dev.bgp.router_id or self.loopback or "0.0.0.0"

    def owns(self, addr: int) -> bool:
        if addr in self.addresses:
            return True
        return any((addr & _MASKS[l]) == n for n, l in self.loop_nets)

    def lpm(self, addr: int, exclude=()) -> RouteEntry | None:
        rib = self.rib
        for plen in range(32, -1, -1):
            e = rib.get((addr & _MASKS[plen], plen))
            if e is not None and e.protocol not in exclude:
                return e
        return None

    def install(self, key: tuple[int, int], entry: RouteEntry) -> None:
        cur = self.rib.get(key)
        if cur is None or entry.distance < cur.distance:
            self.rib[key] = entry


# -- IGP -------------------------------------------------------------------


def _spf(adj: dict[str, list[tuple[str, int]]], src: str):
    dist = {src: 0}
    hops: dict[str, frozenset] = {src: frozenset()}
    heap = [(0, src)]
    done: set[str] = set()
    while heap:
        d, u = heapq.heappop(heap)
        if u in done:
            continue
        done.add(u)
        for v, c in adj.get(u, ()):
            nd = d + c
            fh = frozenset([v]) if u == src else hops[u]
            if v not in dist or nd < dist[v]:
                dist[v] = nd
                hops[v] = fh
                heapq.heappush(heap, (nd, v))
            elif nd == dist[v] and v not in done:
                hops[v] = hops[v] | fh
    return dist, hops


def _link_ifaces(routers: dict[str, _Router], t: Topology):
    for a, ia, b, ib in t.links:
        if a not in routers or b not in routers:
            continue
        x = routers[a].dev.interface(ethernet(ia))
        y = routers[b].dev.interface(ethernet(ib))
        if x is None or y is None or x.network is None or y.network is None:
            continue
        if x.network != y.network or x.ip == y.ip:
            continue
        yield a, x, b, y


def _best_merge(table: dict, key, cost: int, hops: frozenset) -> None:
    cur = table.get(key)
    if cur is None or cost < cur[0]:
        table[key] = (cost, hops)
    elif cost == cur[0]:
        table[key] = (cost, cur[1] | hops)


class _Ospf:
    """Link-state computation with areas, ABR summaries and type-2 externals."""

    def __init__(self, routers: dict[str, _Router], t: Topology):
        self.members = [r for r, x in routers.items() if x.dev.ospf is not None]
        rid_count: dict[str, int] = {}
        for r in self.members:
            rid = routers[r].ospf_rid
            rid_count[rid] = rid_count.get(rid, 0) + 1
        self.suppressed = {r for r in self.members if rid_count[routers[r].ospf_rid] > 1}
        self.areas_of: dict[str, set[int]] = {r: set() for r in self.members}
        self.stubs: dict[int, dict[str, list]] = {}
        for r in self.members:
            for i in routers[r].dev.interfaces:
                if i.ospf_area is None or i.network is None:
                    continue
                self.areas_of[r].add(i.ospf_area)
                cost = i.ospf_cost if i.ospf_cost is not None else (
                    LOOPBACK_OSPF_COST if i.is_loopback else DEFAULT_OSPF_COST
                )
                key = (int(i.network.network_address), i.network.prefixlen)
                self.stubs.setdefault(i.ospf_area, {}).setdefault(r, []).append((key, cost))
        for r in self.members:
            if routers[r].dev.ospf.redistribute_bgp is not None:
                for area in self.areas_of[r]:
                    self.stubs.setdefault(area, {}).setdefault(r, []).append((("asbr", r), 0))
        self.adj: dict[int, dict[str, list]] = {}
        ospf_set = set(self.members)
        for a, x, b, y in _link_ifaces(routers, t):
            if a not in ospf_set or b not in ospf_set or a in self.suppressed or b in self.suppressed:
                continue
            if x.ospf_area is None or x.ospf_area != y.ospf_area:
                continue
            cx = x.ospf_cost if x.ospf_cost is not None else DEFAULT_OSPF_COST
            cy = y.ospf_cost if y.ospf_cost is not None else DEFAULT_OSPF_COST
            g = self.adj.setdefault(x.ospf_area, {})
            g.setdefault(a, []).append((b, cx))
            g.setdefault(b, []).append((a, cy))
        for g in self.adj.values():
            for lst in g.values():
                lst.sort()
        self._spf_cache: dict = {}
        self._area_routes: dict = {}
        self.abrs = {r for r in self.members if 0 in self.areas_of[r] and len(self.areas_of[r]) > 1}
        self.tables: dict[str, dict] = {}
        self._compute()

    def spf(self, area: int, r: str):
        key = (area, r)
        if key not in self._spf_cache:
            self._spf_cache[key] = _spf(self.adj.get(area, {}), r)
        return self._spf_cache[key]

    def area_routes(self, r: str, area: int) -> dict:
        """Intra-area routes of ``r`` in ``area``: key -> (cost, first hops)."""
        key = (r, area)
        if key in self._area_routes:
            return self._area_routes[key]
        dist, hops = self.spf(area, r)
        out: dict = {}
        for x, d in dist.items():
            for pk, c in self.stubs.get(area, {}).get(x, ()):
                _best_merge(out, pk, d + c, hops[x])
        self._area_routes[key] = out
        return out

    def _intra(self, r: str) -> dict:
        out: dict = {}
        for area in sorted(self.areas_of[r]):
            for pk, (c, h) in self.area_routes(r, area).items():
                _best_merge(out, pk, c, h)
        return out

    def _compute(self) -> None:
        intra = {r: self._intra(r) for r in self.members}
        # backbone view: intra plus summaries from ABRs reachable in area 0
        summaries = {}
        for b in self.abrs:
            s: dict = {}
            for area in self.areas_of[b]:
                if area == 0:
                    continue
                for pk, (c, _h) in self.area_routes(b, area).items():
                    _best_merge(s, pk, c, frozenset())
            summaries[b] = s
        backbone: dict[str, dict] = {}
        for r in self.members:
            if 0 not in self.areas_of[r]:
                continue
            table = {pk: (c, h, "intra") for pk, (c, h) in intra[r].items()}
            dist0, hops0 = self.spf(0, r)
            inter: dict = {}
            for b in sorted(self.abrs):
                if b == r or b not in dist0:
                    continue
                for pk, (c, _h) in summaries[b].items():
                    if pk in table:
                        continue
                    _best_merge(inter, pk, dist0[b] + c, hops0[b])
            for pk, (c, h) in inter.items():
                table[pk] = (c, h, "inter")
            backbone[r] = table
        for r in self.members:
            if r in backbone:
                self.tables[r] = backbone[r]
                continue
            table = {pk: (c, h, "intra") for pk, (c, h) in intra[r].items()}
            inter = {}
            for area in sorted(self.areas_of[r]):
                dist, hops = self.spf(area, r)
                for b in sorted(self.abrs):
                    if b not in dist or area not in self.areas_of[b]:
                        continue
                    for pk, (c, _h, kind) in backbone[b].items():
                        if pk in table:
                            continue
                        if kind == "intra" and pk in self.area_routes(b, area):
                            continue
                        _best_merge(inter, pk, dist[b] + c, hops[b])
            for pk, (c, h) in inter.items():
                table[pk] = (c, h, "inter")
            self.tables[r] = table

    def cost_to_asbr(self, r: str, asbr: str):
        return self.tables.get(r, {}).get(("asbr", asbr))


class _Isis:
    """Two-level IS-IS: per-area L1 SPF, an L2 SPF, L1 leaking and default routes."""

    def __init__(self, routers: dict[str, _Router], t: Topology):
        self.members = [r for r, x in routers.items() if x.dev.isis is not None]
        proc = {r: routers[r].dev.isis for r in self.members}
        self.stubs: dict[str, list] = {r: [] for r in self.members}
        for r in self.members:
            for i in routers[r].dev.interfaces:
                if i.isis and i.network is not None:
                    self.stubs[r].append(((int(i.network.network_address), i.network.prefixlen), ISIS_METRIC))
        l1: dict[str, dict[str, list]] = {}
        l2: dict[str, list] = {}
        mset = set(self.members)
        for a, x, b, y in _link_ifaces(routers, t):
            if a not in mset or b not in mset or not (x.isis and y.isis):
                continue
            pa, pb = proc[a], proc[b]
            if pa.l1 and pb.l1 and pa.area == pb.area:
                g = l1.setdefault(pa.area, {})
                g.setdefault(a, []).append((b, ISIS_METRIC))
                g.setdefault(b, []).append((a, ISIS_METRIC))
            if pa.l2 and pb.l2:
                l2.setdefault(a, []).append((b, ISIS_METRIC))
                l2.setdefault(b, []).append((a, ISIS_METRIC))
        self.tables: dict[str, dict] = {}
        self.defaults: dict[str, tuple] = {}
        l1_routes: dict[str, dict] = {}
        for r in self.members:
            if not proc[r].l1:
                continue
            dist, hops = _spf(l1.get(proc[r].area, {}), r)
            out: dict = {}
            for x, d in dist.items():
                if proc[x].l1:
                    for pk, c in self.stubs[x]:
                        _best_merge(out, pk, d + c, hops[x])
            l1_routes[r] = out
        for r in self.members:
            table = {pk: v for pk, v in l1_routes.get(r, {}).items()}
            if proc[r].l2:
                dist, hops = _spf(l2, r)
                out = {}
                for x, d in dist.items():
                    adv = list(self.stubs[x])
                    if proc[x].l1:
                        adv += [(pk, c) for pk, (c, _h) in l1_routes[x].items()]
                    for pk, c in adv:
                        _best_merge(out, pk, d + c, hops[x])
                for pk, v in out.items():
                    table.setdefault(pk, v)
            elif proc[r].l1:
                dist, hops = _spf(l1.get(proc[r].area, {}), r)
                exits = [x for x in dist if x != r and proc[x].l2 and l2.get(x)]
                if exits:
                    best = min(dist[x] for x in exits)
                    fh = frozenset().union(*(hops[x] for x in exits if dist[x] == best))
                    self.defaults[r] = (best, fh)
            self.tables[r] = table


# -- the simulation ---------------------------------------------------------


class _State:
    def __init__(self, models: dict[str, DeviceModel], t: Topology):
        self.t = t
        self.routers = {r: _Router(models[r]) for r in sorted(models)}
        self.sessions: list[BgpSession] = []
        self._resolve_cache: dict = {}
        self._connected()
        self.ospf = _Ospf(self.routers, t)
        self.isis = _Isis(self.routers, t)
        self._install_igp()
        self._statics()

    # connected / IGP / static
    def _connected(self) -> None:
        for r, x in self.routers.items():
            for i in x.dev.interfaces:
                if i.network is None:
                    continue
                key = (int(i.network.network_address), i.network.prefixlen)
                x.install(key, RouteEntry(str(i.network), "connected", interface=i.name))

    def _install_igp(self) -> None:
        for r, table in self.ospf.tables.items():
            x = self.routers[r]
            for pk, (c, h, _kind) in table.items():
                if pk[0] == "asbr" or not h:
                    continue
                x.install(pk, RouteEntry(_pstr(pk), "ospf", igp_metric=c, next_routers=h))
        for r, table in self.isis.tables.items():
            x = self.routers[r]
            for pk, (c, h) in table.items():
                if h:
                    x.install(pk, RouteEntry(_pstr(pk), "isis", igp_metric=c, next_routers=h))
            if r in self.isis.defaults:
                c, h = self.isis.defaults[r]
                x.install((0, 0), RouteEntry("0.0.0.0/0", "isis", igp_metric=c, next_routers=h))

    def _statics(self) -> None:
        for r, x in self.routers.items():
            for s in x.dev.statics:
                key = _pkey(s.prefix)
                if s.next_hop.lower() == "null0":
                    x.install(key, RouteEntry(_pstr(key), "static", next_hop="Null0"))
                    continue
                via = x.lpm(_aint(s.next_hop), exclude=("static",))
                if via is not None:
                    x.install(key, RouteEntry(_pstr(key), "static", next_hop=s.next_hop))

    # forwarding resolution
    def resolve(self, r: str, addr: int, transport: bool = False, depth: int = 0) -> Action:
        ck = (r, addr, transport)
        hit = self._resolve_cache.get(ck)
        if hit is not None:
            return hit
        act = self._resolve(r, addr, transport, depth)
        self._resolve_cache[ck] = act
        return act

    def _resolve(self, r: str, addr: int, transport: bool, depth: int) -> Action:
        x = self.routers[r]
        if x.owns(addr):
            return ACTION_ACCEPT
        if depth > MAX_RESOLVE_DEPTH:
            return ACTION_DROP
        e = x.lpm(addr, exclude=("ebgp", "ibgp", "ospf-external") if transport else ())
        if e is None:
            return ACTION_DROP
        if e.protocol == "connected":
            iface = x.dev.interface(e.interface)
            if iface is None or iface.is_loopback or not iface.name.startswith("Ethernet"):
                return ACTION_DROP
            peer = self.t.peer_of(r, int(iface.name[len("Ethernet"):]))
            if peer is None or peer[0] not in self.routers:
                return ACTION_DROP
            pif = self.routers[peer[0]].dev.interface(ethernet(peer[1]))
            if pif is not None and pif.ip and _aint(pif.ip) == addr:
                return Action(FORWARD, frozenset([peer[0]]))
            return ACTION_DROP
        if e.protocol in ("ospf", "isis", "ospf-external"):
            return Action(FORWARD, e.next_routers) if e.next_routers else ACTION_DROP
        if e.next_hop is None or e.next_hop == "Null0":
            return ACTION_DROP
        nh = self.resolve(r, _aint(e.next_hop), True, depth + 1)
        return nh if nh.kind == FORWARD else ACTION_DROP

    def walk(self, r: str, addr: int) -> set[str] | None:
        """Routers at which traffic from ``r`` to ``addr`` is accepted, or None if any branch drops."""
        seen = {r}
        queue = deque([r])
        ends: set[str] = set()
        while queue:
            u = queue.popleft()
            act = self.resolve(u, addr, True)
            if act.kind == ACCEPT:
                ends.add(u)
            elif act.kind == DROP:
                return None
            else:
                for v in sorted(act.next_routers):
                    if v not in seen:
                        seen.add(v)
                        queue.append(v)
        return ends or None

    # BGP
    def _source(self, r: str, n) -> str | None:
        dev = self.routers[r].dev
        if n.update_source:
            i = dev.interface(n.update_source)
            return i.ip if i is not None else None
        a = _aint(n.address)
        for i in dev.interfaces:
            if i.network is not None and not i.is_loopback and a in _net_range(i):
                return i.ip
        act = self.resolve(r, a, True)
        if act.kind != FORWARD:
            return None
        nxt = min(act.next_routers)
        for ifid, (peer, _pif) in sorted(self.t.interfaces(r).items()):
            if peer == nxt:
                i = dev.interface(ethernet(ifid))
                return i.ip if i is not None else None
        return None

    def find_sessions(self) -> list[BgpSession]:
        speakers = {r: x for r, x in self.routers.items() if x.dev.bgp is not None}
        up: dict[tuple, BgpSession] = {}
        for r in sorted(speakers):
            x = speakers[r]
            for n in x.dev.bgp.neighbors:
                if n.shutdown:
                    continue
                ends = self.walk(r, _aint(n.address))
                if not ends or len(ends) != 1:
                    continue
                s = next(iter(ends))
                if s == r or s not in speakers:
                    continue
                src = self._source(r, n)
                if src is None:
                    continue
                m = speakers[s].dev.bgp.neighbor(src)
                if m is None or m.shutdown:
                    continue
                if self.walk(s, _aint(m.address)) != {r} or self._source(s, m) != n.address:
                    continue
                if n.remote_as != speakers[s].dev.bgp.asn or m.remote_as != x.dev.bgp.asn:
                    continue
                a, b = (r, s) if r < s else (s, r)
                a_addr, b_addr = (src, n.address) if r < s else (n.address, src)
                key = (a, b, a_addr, b_addr)
                up[key] = BgpSession(a, b, a_addr, b_addr, x.dev.bgp.asn != speakers[s].dev.bgp.asn)
        self.sessions = [up[k] for k in sorted(up)]
        return self.sessions


def _net_range(iface) -> range:
    net = iface.network
    return range(int(net.network_address), int(net.broadcast_address) + 1)


def _prefix_list_permits(dev: DeviceModel, name: str, prefix: str) -> bool:
    entries = dev.prefix_lists.get(name)
    if entries is None:
        return True
    addr, plen = _pkey(prefix)
    for e in sorted(entries, key=lambda e: e.seq):
        base, blen = _pkey(e.prefix)
        if plen < blen or (addr & _MASKS[blen]) != base:
            continue
        if e.ge is None and e.le is None:
            hit = plen == blen
        else:
            lo = e.ge if e.ge is not None else blen
            hi = e.le if e.le is not None else 32
            hit = lo <= plen <= hi
        if hit:
            return e.action == "permit"
    return False


def apply_route_map(dev: DeviceModel, name: str | None, path: _Path, cache: dict | None = None) -> _Path | None:
    """First-match route-map evaluation with an implicit deny; None means rejected."""
    if name is None:
        return path
    clauses = dev.route_maps.get(name)
    if clauses is None:
        return path
    for c in sorted(clauses, key=lambda c: c.seq):
        if c.match_prefix_list:
            if cache is None:
                ok = _prefix_list_permits(dev, c.match_prefix_list, path.prefix)
            else:
                ck = (dev.hostname, c.match_prefix_list, path.prefix)
                ok = cache.get(ck)
                if ok is None:
                    ok = cache[ck] = _prefix_list_permits(dev, c.match_prefix_list, path.prefix)
            if not ok:
                continue
        if c.action != "permit":
            return None
        changes = {}
        if c.set_local_pref is not None:
            changes["local_pref"] = c.set_local_pref
        if c.set_next_hop:
            changes["next_hop"] = c.set_next_hop
        if changes:
            path = _replace(path, **changes)
        return path
    return None


def _replace(path: _Path, **kw) -> _Path:
    # frozen dataclass: copy the instance dict directly, skipping __init__
    new = object.__new__(_Path)
    new.__dict__.update(path.__dict__)
    new.__dict__.update(kw)
    return new


class _Bgp:
    def __init__(self, st: _State, order: str = "forward"):
        self.st = st
        self.speakers = sorted(r for r, x in st.routers.items() if x.dev.bgp is not None)
        self.best: dict[str, dict[str, _Path]] = {r: {} for r in self.speakers}
        self.adj_in: dict[str, dict[str, dict[str, _Path]]] = {r: {} for r in self.speakers}
        self.peers: dict[str, list[tuple[str, str, str, bool]]] = {r: [] for r in self.speakers}
        for s in st.sessions:
            self.peers[s.a].append((s.b, s.a_addr, s.b_addr, s.ebgp))
            self.peers[s.b].append((s.a, s.b_addr, s.a_addr, s.ebgp))
        self.local: dict[str, dict[str, _Path]] = {}
        for r in self.speakers:
            x = st.routers[r]
            loc = {}
            for p in x.dev.bgp.networks:
                key = _pkey(p)
                e = x.rib.get(key)
                if e is None:
                    continue
                loc[_pstr(key)] = _Path(_pstr(key), originator=None, peer_rid=x.bgp_rid)
            self.local[r] = loc
        self.order = order
        self._pl_cache: dict = {}
        self._clients = {
            r: {n.address for n in st.routers[r].dev.bgp.neighbors if n.rr_client} for r in self.speakers
        }

    def _metric(self, r: str, nh: str | None) -> int | None:
        if nh is None:
            return 0
        x = self.st.routers[r]
        a = _aint(nh)
        if x.owns(a):
            return None
        act = self.st.resolve(r, a, True)
        if act.kind != FORWARD:
            return None
        e = x.lpm(a, exclude=("ebgp", "ibgp", "ospf-external"))
        return e.igp_metric if e is not None else 0

    def decide(self, r: str) -> dict[str, _Path]:
        cands: dict[str, list] = {}
        for p, path in self.local[r].items():
            cands.setdefault(p, []).append(path)
        for peer in sorted(self.adj_in[r]):
            for p, path in self.adj_in[r][peer].items():
                cands.setdefault(p, []).append(path)
        best = {}
        metrics: dict = {}
        for p, paths in cands.items():
            ranked = []
            for path in paths:
                nh = path.next_hop
                if nh not in metrics:
                    metrics[nh] = self._metric(r, nh)
                m = metrics[nh]
                if m is None:
                    continue
                origin = path.originator or path.peer_rid or "0.0.0.0"
                ranked.append((
                    -(path.local_pref if path.local_pref is not None else DEFAULT_LOCAL_PREF),
                    0 if path.local else 1,
                    len(path.as_path),
                    0 if path.ebgp or path.local else 1,
                    m,
                    _aint(origin),
                    _aint(path.peer_addr) if path.peer_addr else 0,
                    path,
                ))
            if ranked:
                ranked.sort(key=lambda t: t[:7])
                best[p] = ranked[0][-1]
        return best

    def export(self, r: str, s: str, my_addr: str, peer_addr: str, ebgp: bool) -> dict[str, _Path]:
        st = self.st
        rdev, sdev = st.routers[r].dev, st.routers[s].dev
        n = rdev.bgp.neighbor(peer_addr)
        m = sdev.bgp.neighbor(my_addr)
        out: dict[str, _Path] = {}
        s_rid = st.routers[s].bgp_rid
        s_cluster = sdev.bgp.cluster_id or s_rid
        for p, path in self.best[r].items():
            if path.peer == s:
                continue
            if ebgp:
                new = _Path(
                    p,
                    as_path=(rdev.bgp.asn,) + path.as_path,
                    local_pref=None,
                    next_hop=my_addr,
                )
            else:
                if path.local or path.ebgp:
                    nh = my_addr if (path.local or n.next_hop_self) else path.next_hop
                    new = _replace(path, next_hop=nh, originator=None, cluster_list=())
                else:
                    from_client = path.peer_addr in self._clients[r]
                    if not (from_client or n.rr_client):
                        continue
                    cluster = rdev.bgp.cluster_id or st.routers[r].bgp_rid
                    new = _replace(
                        path,
                        originator=path.originator or path.peer_rid,
                        cluster_list=(cluster,) + path.cluster_list,
                    )
            new = apply_route_map(rdev, n.route_map_out, new, self._pl_cache)
            if new is None:
                continue
            # receiver side
            if ebgp:
                if sdev.bgp.asn in new.as_path:
                    continue
            else:
                if new.originator == s_rid or s_cluster in new.cluster_list:
                    continue
            recv = {"peer": r, "peer_addr": peer_addr_of(m, my_addr), "peer_rid": st.routers[r].bgp_rid, "ebgp": ebgp}
            if ebgp:
                recv["local_pref"] = DEFAULT_LOCAL_PREF
            new = _replace(new, **recv)
            new = apply_route_map(sdev, m.route_map_in, new, self._pl_cache)
            if new is None:
                continue
            out[p] = new
        return out

    def run(self, n_prefixes: int) -> None:
        order = list(self.speakers)
        if self.order == "reverse":
            order.reverse()
        budget = max(1, 2 * len(self.st.routers) * max(1, n_prefixes))
        queue = deque(order)
        queued = set(order)
        steps = 0
        while queue:
            r = queue.popleft()
            queued.discard(r)
            steps += 1
            if steps > budget:
                raise DivergenceError(f"BGP did not converge within {budget} iterations")
            self.best[r] = self.decide(r)
            peers = self.peers[r] if self.order != "reverse" else list(reversed(self.peers[r]))
            for s, my_addr, peer_addr, ebgp in peers:
                exported = self.export(r, s, my_addr, peer_addr, ebgp)
                if self.adj_in[s].get(r) != exported:
                    self.adj_in[s][r] = exported
                    if s not in queued:
                        queued.add(s)
                        queue.append(s)


def peer_addr_of(m, my_addr: str) -> str:
    return my_addr if m is None else m.address


@dataclass
class ForwardingTable:
    """Per-(router, prefix) forwarding actions plus what is needed to judge ACLs per hop."""

    entries: dict[tuple[str, str], Action]
    universe: list[str]
    routers: list[str]
    loopbacks: dict[str, str | None]
    hop_acls: dict[tuple[str, str], tuple[list[AclRule] | None, list[AclRule] | None]] = field(default_factory=dict)
    rib_summary: dict[str, dict[str, int]] = field(default_factory=dict)
    sessions: list[BgpSession] = field(default_factory=list)

    def action(self, router: str, prefix: str) -> Action:
        return self.entries.get((router, prefix), ACTION_DROP)

    def owners(self, prefix: str) -> list[str]:
        return [r for r in self.routers if self.action(r, prefix).kind == ACCEPT]

    def hop_permits(self, r: str, s: str, src: str | None, dst: str) -> bool:
        acls = self.hop_acls.get((r, s))
        if acls is None:
            return True
        for rules in acls:
            if rules is None:
                continue
            verdict = "deny"
            for rule in rules:
                if rule.matches(src or "0.0.0.0", dst):
                    verdict = rule.action
                    break
            if verdict != "permit":
                return False
        return True

    def hop_src_dependent(self, r: str, s: str) -> bool:
        acls = self.hop_acls.get((r, s))
        return bool(acls) and any(
            rules is not None and any(rule.src != "any" for rule in rules) for rules in acls
        )

    def prefix_signature(self, prefix: str) -> tuple:
        return tuple(self.action(r, prefix) for r in self.routers)

    def to_dict(self) -> dict:
        return {
            "routers": list(self.routers),
            "universe": list(self.universe),
            "loopbacks": dict(sorted(self.loopbacks.items())),
            "entries": [
                {"router": r, "prefix": p, **self.entries[(r, p)].to_json()}
                for r, p in sorted(self.entries, key=lambda k: (k[0], _pkey(k[1])))
            ],
            "hop_acls": [
                {
                    "from": r,
                    "to": s,
                    "out": None if o is None else [[x.action, x.src, x.dst] for x in o],
                    "in": None if i is None else [[x.action, x.src, x.dst] for x in i],
                }
                for (r, s), (o, i) in sorted(self.hop_acls.items())
            ],
            "rib_summary": self.rib_summary,
            "sessions": [[s.a, s.b, s.a_addr, s.b_addr, s.ebgp] for s in self.sessions],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ForwardingTable":
        entries = {}
        for e in d["entries"]:
            if e["action"] == FORWARD:
                act = Action(FORWARD, frozenset(e["to"]))
            else:
                act = ACTION_ACCEPT if e["action"] == ACCEPT else ACTION_DROP
            entries[(e["router"], e["prefix"])] = act

        def rules(x):
            return None if x is None else [AclRule(*r) for r in x]

        hop = {(h["from"], h["to"]): (rules(h["out"]), rules(h["in"])) for h in d.get("hop_acls", [])}
        sessions = [BgpSession(*s) for s in d.get("sessions", [])]
        return cls(entries, list(d["universe"]), list(d["routers"]), dict(d["loopbacks"]), hop,
                   d.get("rib_summary", {}), sessions)


def prefix_universe(models: dict[str, DeviceModel]) -> list[str]:
    """Loopback subnets plus every BGP network statement, sorted by address."""
    keys = set()
    for dev in models.values():
        for i in dev.interfaces:
            if i.is_loopback and i.network is not None:
                keys.add((int(i.network.network_address), i.network.prefixlen))
        if dev.bgp is not None:
            for p in dev.bgp.networks:
                keys.add(_pkey(p))
    return [_pstr(k) for k in sorted(keys)]


def compute_dataplane(
    models: dict[str, DeviceModel],
    t: Topology,
    universe: list[str] | None = None,
    order: str = "forward",
) -> ForwardingTable:
    """Compute the forwarding table for ``models`` on topology ``t``.

    ``universe`` defaults to the prefixes derived from ``models``; pass the golden
    universe when evaluating broken or repaired states. ``order`` selects the BGP
    worklist order and exists to check fixpoint independence.

    Raises:
        DivergenceError: when BGP does not converge within its iteration budget.
    """
    if universe is None:
        universe = prefix_universe(models)
    st = _State(models, t)
    st.find_sessions()
    bgp = _Bgp(st, order)
    bgp.run(len(universe))
    for r in bgp.speakers:
        x = st.routers[r]
        for p, path in bgp.best[r].items():
            if path.local:
                continue
            key = _pkey(p)
            proto = "ebgp" if path.ebgp else "ibgp"
            x.install(key, RouteEntry(
                p, proto,
                igp_metric=bgp._metric(r, path.next_hop) or 0,
                local_pref=path.local_pref,
                as_path_length=len(path.as_path),
                origin_router_id=path.originator or path.peer_rid,
                next_hop=path.next_hop,
                learned_from=path.peer,
            ))
    _install_externals(st, bgp)
    st._resolve_cache.clear()

    entries: dict[tuple[str, str], Action] = {}
    for p in universe:
        addr = _pkey(p)[0]
        for r in st.routers:
            entries[(r, p)] = st.resolve(r, addr)

    hop_acls = {}
    for a, ia, b, ib in t.links:
        if a not in st.routers or b not in st.routers:
            continue
        for x, ix, y, iy in ((a, ia, b, ib), (b, ib, a, ia)):
            xo = st.routers[x].dev.interface(ethernet(ix))
            yi = st.routers[y].dev.interface(ethernet(iy))
            out_acl = _bound_acl(st.routers[x].dev, xo.acl_out if xo else None)
            in_acl = _bound_acl(st.routers[y].dev, yi.acl_in if yi else None)
            if out_acl is not None or in_acl is not None:
                hop_acls[(x, y)] = (out_acl, in_acl)
    summary = {}
    for r, x in st.routers.items():
        counts: dict[str, int] = {}
        for e in x.rib.values():
            counts[e.protocol] = counts.get(e.protocol, 0) + 1
        summary[r] = dict(sorted(counts.items()))
    return ForwardingTable(
        entries=entries,
        universe=list(universe),
        routers=list(st.routers),
        loopbacks={r: x.loopback for r, x in st.routers.items()},
        hop_acls=hop_acls,
        rib_summary=summary,
        sessions=list(st.sessions),
    )


def _bound_acl(dev: DeviceModel, name: str | None):
    # an ACL name that is bound but never defined permits everything
    if name is None or name not in dev.acls:
        return None
    return dev.acls[name]


def _install_externals(st: _State, bgp: _Bgp) -> None:
    ospf = st.ospf
    ext: dict[str, list[str]] = {}
    for r in ospf.members:
        x = st.routers[r]
        asn = x.dev.ospf.redistribute_bgp
        if asn is None or x.dev.bgp is None or x.dev.bgp.asn != asn:
            continue
        ext[r] = sorted(p for p, path in bgp.best.get(r, {}).items() if not path.local)
    if not ext:
        return
    for r in ospf.members:
        x = st.routers[r]
        cands: dict = {}
        for asbr, prefixes in ext.items():
            if asbr == r:
                continue
            route = ospf.cost_to_asbr(r, asbr)
            if route is None:
                continue
            cost, hops = route[0], route[1]
            for p in prefixes:
                _best_merge(cands, _pkey(p), cost, hops)
        for key, (cost, hops) in cands.items():
            cur = x.rib.get(key)
            if cur is not None and cur.distance <= ADMIN_DISTANCE["ospf-external"]:
                continue
            if hops:
                x.rib[key] = RouteEntry(_pstr(key), "ospf-external", igp_metric=cost, next_routers=hops)


def reachable_transport(models: dict[str, DeviceModel], t: Topology, a: str, b: str) -> bool:
    """True iff ``a`` reaches address ``b`` over connected, IGP and static routes alone."""
    st = _State(models, t)
    return st.walk(a, _aint(b)) is not None
