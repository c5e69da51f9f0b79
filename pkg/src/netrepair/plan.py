"""Logical network plans: AS partition, IGP layout, BGP sessions, addressing, policy.

A plan carries both the design-level view (ASes, sessions, address pools) and the
per-router device models it implies. Faults mutate the device models; the renderer
turns them into configuration text.
"""

from __future__ import annotations

import copy
import ipaddress
import json
import math
import random
from collections import deque
from dataclasses import asdict, dataclass, field

from netrepair.configtext.model import (
    GRAMMAR_VERSION,
    AclRule,
    BgpProcess,
    DeviceModel,
    Interface,
    IsisProcess,
    Neighbor,
    OspfProcess,
    PrefixListEntry,
    RouteMapClause,
    StaticRoute,
    ethernet,
)
from netrepair.topo import Topology, is_connected

PLAN_VERSION = "plan-1"

FEATURES = (
    "ebgp",
    "ibgp",
    "route-reflection",
    "ospf",
    "ospf-multi-area",
    "isis",
    "isis-multi-level",
    "static-routes",
    "redistribution-bgp-ospf",
    "acl-in",
    "acl-out",
    "route-maps",
    "prefix-lists",
    "local-pref-policy",
    "community-free-export",
    "next-hop-self",
    "network-statements",
)

DEPENDENCIES: dict[str, tuple[str, ...]] = {
    "ebgp": ("network-statements",),
    "ibgp": ("ebgp",),
    "route-reflection": ("ibgp",),
    "ospf-multi-area": ("ospf",),
    "isis-multi-level": ("isis",),
    "static-routes": ("ibgp",),
    "redistribution-bgp-ospf": ("ebgp", "ospf"),
    "route-maps": ("ebgp",),
    "prefix-lists": ("ebgp",),
    "local-pref-policy": ("route-maps",),
    "community-free-export": ("ebgp",),
    "next-hop-self": ("ibgp",),
}

ASN_BASE = 65001
LINK_POOL = ipaddress.IPv4Network("10.0.0.0/8")
LOOPBACK_POOL = ipaddress.IPv4Network("172.20.0.0/16")
LAN_POOL = ipaddress.IPv4Network("100.64.0.0/10")
ACL_DUMMY_HOST = "10.255.254.1"
OSPF_DEFAULT_COST = 10
REDISTRIBUTE_METRIC = 20
DEFAULT_LOCAL_PREF = 100
PREFERRED_LOCAL_PREF = 150
CUSTOMER_LIST = "PL_CUSTOMER"


class PlanError(ValueError):
    pass


def resolve_dependencies(requested) -> frozenset[str]:
    """Smallest dependency-closed feature set containing ``requested``.

    A baseline of network statements plus one IGP is always present; OSPF is the
    default IGP unless IS-IS is requested. Running both IGPs needs two ASes, so it
    pulls in eBGP.
    """
    feats = set(requested)
    unknown = feats - set(FEATURES)
    if unknown:
        raise PlanError(f"unknown feature flag(s): {', '.join(sorted(unknown))}")
    feats.add("network-statements")
    changed = True
    while changed:
        changed = False
        for f in sorted(feats):
            for dep in DEPENDENCIES.get(f, ()):
                if dep not in feats:
                    feats.add(dep)
                    changed = True
        if "ospf" not in feats and "isis" not in feats:
            feats.add("ospf")
            changed = True
        if {"ospf", "isis"} <= feats and "ebgp" not in feats:
            feats.add("ebgp")
            changed = True
    return frozenset(feats)


# -- AS partition ------------------------------------------------------------


def _induced_adj(t: Topology, nodes: set[str]) -> dict[str, set[str]]:
    adj = {n: set() for n in nodes}
    for a, _, b, _ in t.links:
        if a in nodes and b in nodes:
            adj[a].add(b)
            adj[b].add(a)
    return adj


def _connected_without(adj: dict[str, set[str]], nodes: set[str], removed: set[str]) -> bool:
    rest = [n for n in nodes if n not in removed]
    if not rest:
        return True
    seen = {rest[0]}
    queue = deque([rest[0]])
    while queue:
        for nxt in adj[queue.popleft()]:
            if nxt not in removed and nxt not in seen:
                seen.add(nxt)
                queue.append(nxt)
    return len(seen) == len(rest)


def as_count(n: int, features) -> int:
    if "ebgp" not in features or n < 2:
        return 1
    return min(n, max(2, math.ceil(n / 25)))


def partition_ases(t: Topology, features, seed: int) -> list[list[str]]:
    """Split routers into connected AS member lists (one list when eBGP is off).

    Regions are grown one at a time from a random seed router, only absorbing
    routers whose removal keeps the unassigned remainder connected.
    """
    k = as_count(len(t), features)
    if k == 1:
        return [list(t.routers)]
    rng = random.Random(seed)
    remaining = set(t.routers)
    groups: list[list[str]] = []
    for idx in range(k - 1):
        parts_left = k - idx
        if parts_left == 2:
            target = math.ceil(0.6 * len(remaining))
        else:
            target = math.ceil(len(remaining) / parts_left)
        target = min(target, len(remaining) - (parts_left - 1))
        adj = _induced_adj(t, remaining)
        group: set[str] = set()
        order = sorted(remaining)
        rng.shuffle(order)
        for cand in order:
            if _connected_without(adj, remaining, {cand}):
                group.add(cand)
                break
        while len(group) < target:
            frontier = sorted({nb for g in group for nb in adj[g]} - group)
            rng.shuffle(frontier)
            for cand in frontier:
                if _connected_without(adj, remaining, group | {cand}):
                    group.add(cand)
                    break
            else:
                break
        groups.append(sorted(group))
        remaining -= group
    groups.append(sorted(remaining))
    return groups


# -- plan data ---------------------------------------------------------------


@dataclass
class AsPlan:
    asn: int
    members: list[str]
    igp: str
    multi: bool = False
    ibgp_design: str = "none"
    reflectors: list[str] = field(default_factory=list)
    clients: list[str] = field(default_factory=list)
    speakers: list[str] = field(default_factory=list)
    asbrs: list[str] = field(default_factory=list)
    redistribute: bool = False
    areas: dict[str, int] = field(default_factory=dict)
    isis_levels: dict[str, str] = field(default_factory=dict)


@dataclass
class Session:
    a: str
    b: str
    kind: str
    source: str
    a_addr: str
    b_addr: str
    route_map_in: dict[str, str] = field(default_factory=dict)
    route_map_out: dict[str, str] = field(default_factory=dict)


@dataclass
class LogicalPlan:
    topology: Topology
    features: list[str]
    seed: int
    ases: list[AsPlan]
    router_asn: dict[str, int]
    link_subnets: dict[str, str]
    interface_ips: dict[str, str]
    loopbacks: dict[str, str]
    router_ids: dict[str, str]
    lans: dict[str, str]
    sessions: list[Session]
    statics: list[dict]
    advertisements: dict[str, list[str]]
    redistributions: list[dict]
    devices: dict[str, DeviceModel]
    metadata: dict = field(default_factory=dict)

    def as_of(self, router: str) -> AsPlan:
        for a in self.ases:
            if router in a.members:
                return a
        raise KeyError(router)

    def copy(self) -> "LogicalPlan":
        return copy.deepcopy(self)

    def to_dict(self) -> dict:
        d = {}
        for key in self.__dataclass_fields__:
            value = getattr(self, key)
            if key == "topology":
                d[key] = value.to_dict()
            elif key == "devices":
                d[key] = {r: _device_dict(dev) for r, dev in sorted(value.items())}
            elif isinstance(value, list):
                d[key] = [asdict(v) if hasattr(v, "__dataclass_fields__") else v for v in value]
            else:
                d[key] = value
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=1) + "\n"


def _device_dict(dev: DeviceModel) -> dict:
    d = asdict(dev)
    d.pop("warnings", None)
    d.pop("dangling", None)
    return d


def link_key(a: str, ia: int, b: str, ib: int) -> str:
    return f"{a}:{ia}-{b}:{ib}"


def _hostname_token(name: str) -> str:
    return name.upper().replace("-", "_")


# -- plan construction -------------------------------------------------------


def _choose_igps(groups, asbrs, feats) -> tuple[list[str], int | None, int | None]:
    k = len(groups)
    rr_as = None
    if "route-reflection" in feats:
        eligible = [i for i, g in enumerate(groups) if len(g) >= 4]
        if not eligible:
            raise PlanError("route-reflection requested but no AS has at least 4 routers")
        rr_as = max(eligible, key=lambda i: (len(groups[i]), -i))
    redist_as = None
    if "redistribution-bgp-ospf" in feats:
        cands = [i for i in range(k) if i != rr_as] or list(range(k))
        redist_as = max(
            cands,
            key=lambda i: (len(set(groups[i]) - asbrs) > 0, len(groups[i]), -i),
        )
    has_ospf, has_isis = "ospf" in feats, "isis" in feats
    if has_ospf and has_isis:
        if k < 2:
            raise PlanError("both OSPF and IS-IS requested but only one AS available")
        igps: list[str | None] = [None] * k
        ospf_as = redist_as if redist_as is not None else 0
        igps[ospf_as] = "ospf"
        others = [i for i in range(k) if i != ospf_as]
        isis_as = rr_as if rr_as in others else others[0]
        igps[isis_as] = "isis"
        flip = ["ospf", "isis"]
        for n, i in enumerate(j for j in range(k) if igps[j] is None):
            igps[i] = flip[n % 2]
        return igps, rr_as, redist_as
    if has_isis and redist_as is not None:
        raise PlanError("redistribution into OSPF requires an OSPF AS")
    return ["isis" if has_isis else "ospf"] * k, rr_as, redist_as


def _core_and_components(t: Topology, members: list[str]):
    mset = set(members)
    adj = _induced_adj(t, mset)
    hub = sorted(members, key=lambda r: (-len(adj[r]), r))[0]
    core = {hub} | adj[hub]
    rest = mset - core
    comps: list[list[str]] = []
    seen: set[str] = set()
    for r in sorted(rest):
        if r in seen:
            continue
        comp, queue = [], deque([r])
        seen.add(r)
        while queue:
            x = queue.popleft()
            comp.append(x)
            for y in sorted(adj[x]):
                if y in rest and y not in seen:
                    seen.add(y)
                    queue.append(y)
        comps.append(sorted(comp))
    return hub, core, comps, adj


def build_plan(t: Topology, features, seed: int) -> LogicalPlan:
    """Build a constraint-satisfying logical plan for ``t`` enabling ``features``.

    Raises:
        PlanError: when a requested feature cannot be realised on the topology.
    """
    feats = resolve_dependencies(features)
    bgp_on = "ebgp" in feats
    groups = partition_ases(t, feats, seed)
    router_as_idx = {r: i for i, g in enumerate(groups) for r in g}
    asbrs = {
        r
        for a, _, b, _ in t.links
        for r in (a, b)
        if router_as_idx[a] != router_as_idx[b]
    }
    igps, rr_as, redist_as = _choose_igps(groups, asbrs, feats)
    ordinal = {r: i + 1 for i, r in enumerate(t.routers)}

    loopbacks = {r: str(LOOPBACK_POOL.network_address + ordinal[r]) for r in t.routers}
    lans = {r: str(ipaddress.IPv4Network((int(LAN_POOL.network_address) + ordinal[r] * 256, 24))) for r in t.routers}
    link_subnets: dict[str, str] = {}
    interface_ips: dict[str, str] = {}
    addr_of: dict[tuple[str, int], str] = {}
    for i, (a, ia, b, ib) in enumerate(t.links):
        base = LINK_POOL.network_address + 2 * i
        link_subnets[link_key(a, ia, b, ib)] = f"{base}/31"
        addr_of[(a, ia)] = str(base)
        addr_of[(b, ib)] = str(base + 1)
        interface_ips[f"{a}:{ia}"] = f"{base}/31"
        interface_ips[f"{b}:{ib}"] = f"{base + 1}/31"

    ases: list[AsPlan] = []
    for i, members in enumerate(groups):
        ap = AsPlan(asn=ASN_BASE + i, members=list(members), igp=igps[i])
        ap.asbrs = sorted(set(members) & asbrs)
        ap.redistribute = i == redist_as
        if bgp_on:
            if ap.redistribute:
                ap.speakers = list(ap.asbrs)
            else:
                ap.speakers = list(members)
        _layout_igp(t, ap, feats)
        if bgp_on and len(ap.speakers) >= 2:
            if i == rr_as and len(ap.speakers) >= 4:
                deg = {r: t.degree(r) for r in ap.speakers}
                ranked = sorted(ap.speakers, key=lambda r: (-deg[r], r))
                first = next((r for r in ranked if r in asbrs), ranked[0])
                ap.reflectors = [first]
                if len(ap.speakers) >= 5:
                    ap.reflectors.append(next(r for r in ranked if r != first))
                ap.reflectors.sort()
                ap.clients = sorted(set(ap.speakers) - set(ap.reflectors))
                ap.ibgp_design = "rr-clusters"
            else:
                ap.ibgp_design = "full-mesh"
        ases.append(ap)
    router_asn = {r: ases[router_as_idx[r]].asn for r in t.routers}

    sessions: list[Session] = []
    if bgp_on:
        for a, ia, b, ib in t.links:
            if router_as_idx[a] != router_as_idx[b]:
                sessions.append(Session(a, b, "ebgp", "interface", addr_of[(a, ia)], addr_of[(b, ib)]))
        for ap in ases:
            if ap.ibgp_design == "full-mesh":
                sp = sorted(ap.speakers)
                for x in range(len(sp)):
                    for y in range(x + 1, len(sp)):
                        sessions.append(Session(sp[x], sp[y], "ibgp", "loopback", loopbacks[sp[x]], loopbacks[sp[y]]))
            elif ap.ibgp_design == "rr-clusters":
                rrs = ap.reflectors
                for x in range(len(rrs)):
                    for y in range(x + 1, len(rrs)):
                        sessions.append(Session(rrs[x], rrs[y], "ibgp", "loopback", loopbacks[rrs[x]], loopbacks[rrs[y]]))
                for rr in rrs:
                    for c in ap.clients:
                        sessions.append(Session(rr, c, "rr-client", "loopback", loopbacks[rr], loopbacks[c]))

    # eBGP policy: import maps only on the first AS so that other ASes keep a leak surface
    first_as = ases[0].asn
    preferred_import: str | None = None
    if "local-pref-policy" in feats:
        for s in sessions:
            if s.kind == "ebgp" and first_as in (router_asn[s.a], router_asn[s.b]):
                preferred_import = s.a if router_asn[s.a] == first_as else s.b
                preferred_import = f"{preferred_import}>{s.b if preferred_import == s.a else s.a}"
                break
    for s in sessions:
        if s.kind != "ebgp":
            continue
        for me, peer in ((s.a, s.b), (s.b, s.a)):
            s.route_map_out[me] = f"RM_OUT_{_hostname_token(peer)}"
            if "route-maps" in feats and router_asn[me] == first_as:
                s.route_map_in[me] = f"RM_IN_{_hostname_token(peer)}"

    # static-backed customer networks: owner t is reached via a static on neighbour s
    statics: list[dict] = []
    static_backed: dict[str, str] = {}
    if "static-routes" in feats and bgp_on:
        for ap in ases:
            if ap.redistribute or len(ap.members) < 2:
                continue
            protected = set(ap.asbrs) | set(ap.reflectors)
            owners = [r for r in sorted(ap.members, reverse=True) if r not in protected] or sorted(ap.members, reverse=True)
            for owner in owners:
                via = [
                    (peer, addr_of[(peer, pif)], addr_of[(owner, oif)])
                    for oif, (peer, pif) in sorted(t.interfaces(owner).items())
                    if router_as_idx[peer] == router_as_idx[owner]
                ]
                if via:
                    via.sort()
                    s_router, _, owner_addr = via[0]
                    statics.append({"router": s_router, "prefix": lans[owner], "next_hop": owner_addr, "owner": owner})
                    static_backed[owner] = s_router
                    break

    advertisements: dict[str, list[str]] = {}
    if bgp_on:
        for ap in ases:
            for r in ap.speakers:
                nets = []
                if r not in static_backed:
                    nets.append(lans[r])
                nets += [st["prefix"] for st in statics if st["router"] == r]
                if r in ap.asbrs:
                    nets.append(f"{loopbacks[r]}/32")
                    if ap.redistribute:
                        nets += [lans[m] for m in ap.members if m not in ap.speakers]
                advertisements[r] = sorted(nets, key=_prefix_sort_key)
    redistributions = [
        {"router": r, "from": "bgp", "to": "ospf"}
        for ap in ases
        if ap.redistribute
        for r in ap.asbrs
    ]

    plan = LogicalPlan(
        topology=t,
        features=sorted(feats),
        seed=seed,
        ases=ases,
        router_asn=router_asn,
        link_subnets=link_subnets,
        interface_ips=interface_ips,
        loopbacks=loopbacks,
        router_ids=dict(loopbacks),
        lans=lans,
        sessions=sessions,
        statics=statics,
        advertisements=advertisements,
        redistributions=redistributions,
        devices={},
        metadata={
            "plan_version": PLAN_VERSION,
            "grammar_version": GRAMMAR_VERSION,
            "asn_base": ASN_BASE,
            "link_pool": str(LINK_POOL),
            "loopback_pool": str(LOOPBACK_POOL),
            "lan_pool": str(LAN_POOL),
            "preferred_import": preferred_import,
        },
    )
    plan.devices = _build_devices(plan, feats, addr_of, preferred_import)
    return plan


def _prefix_sort_key(p: str):
    net = ipaddress.IPv4Network(p)
    return (int(net.network_address), net.prefixlen)


def _layout_igp(t: Topology, ap: AsPlan, feats) -> None:
    members = ap.members
    if ap.igp == "ospf":
        ap.multi = "ospf-multi-area" in feats and len(members) >= 3
        ap.areas = {r: 0 for r in members}
        if ap.multi:
            hub, core, comps, _ = _core_and_components(t, members)
            for j, comp in enumerate(comps, 1):
                for r in comp:
                    ap.areas[r] = j
            if not comps:
                ap.multi = False
    else:
        ap.multi = "isis-multi-level" in feats and len(members) >= 3
        ap.areas = {r: 1 for r in members}
        ap.isis_levels = {r: "level-1" for r in members}
        if ap.multi:
            hub, core, comps, adj = _core_and_components(t, members)
            if not comps:
                ap.multi = False
                return
            anchors: dict[str, list[list[str]]] = {}
            for comp in comps:
                attached = sorted({y for x in comp for y in adj[x] if y in core})
                anchors.setdefault(attached[0], []).append(comp)
            for c in core:
                ap.isis_levels[c] = "level-2-only"
                ap.areas[c] = 1
            for n, anchor in enumerate(sorted(anchors), 2):
                ap.isis_levels[anchor] = "level-1-2"
                ap.areas[anchor] = n
                for comp in anchors[anchor]:
                    for r in comp:
                        ap.areas[r] = n


def isis_net(area: int, loopback: str) -> str:
    digits = "".join(f"{int(o):03d}" for o in loopback.split("."))
    return f"49.{area:04d}.{digits[0:4]}.{digits[4:8]}.{digits[8:12]}.00"


def _link_area(ap: AsPlan, a: str, b: str) -> int:
    if ap.igp == "ospf":
        return max(ap.areas[a], ap.areas[b])
    return 0


def _build_devices(plan: LogicalPlan, feats, addr_of, preferred_import) -> dict[str, DeviceModel]:
    t = plan.topology
    bgp_on = "ebgp" in feats
    devices: dict[str, DeviceModel] = {}
    as_of = {r: ap for ap in plan.ases for r in ap.members}
    bgp_lans = sorted(
        {p for nets in plan.advertisements.values() for p in nets if not p.endswith("/32")},
        key=_prefix_sort_key,
    )
    for r in t.routers:
        ap = as_of[r]
        dev = DeviceModel(hostname=r)
        lo = Interface("Loopback0", plan.loopbacks[r], 32, description="router loopback")
        lan_net = ipaddress.IPv4Network(plan.lans[r])
        lan = Interface("Loopback1", str(lan_net.network_address + 1), 24, description="customer network")
        lan_in_igp = not bgp_on or ap.redistribute
        if ap.igp == "ospf":
            dev.ospf = OspfProcess(pid=1, router_id=plan.router_ids[r])
            lo.ospf_area = ap.areas[r]
            if lan_in_igp:
                lan.ospf_area = ap.areas[r]
            if ap.redistribute and r in ap.asbrs:
                dev.ospf.redistribute_bgp = ap.asn
                dev.ospf.redistribute_metric = REDISTRIBUTE_METRIC
        else:
            dev.isis = IsisProcess(isis_net(ap.areas[r], plan.loopbacks[r]), ap.isis_levels[r])
            lo.isis = True
            lan.isis = lan_in_igp
        dev.interfaces += [lo, lan]
        ifaces = sorted(t.interfaces(r).items())
        for ifid, (peer, pif) in ifaces:
            iface = Interface(
                ethernet(ifid),
                addr_of[(r, ifid)],
                31,
                description=f"link to {peer} {ethernet(pif)}",
            )
            if as_of[peer] is ap:
                if ap.igp == "ospf":
                    iface.ospf_area = _link_area(ap, r, peer)
                    iface.ospf_cost = OSPF_DEFAULT_COST
                else:
                    iface.isis = True
            dev.interfaces.append(iface)
        if ifaces:
            if "acl-in" in feats:
                ifid = ifaces[0][0]
                name = f"ACL_IN_{ethernet(ifid).upper()}"
                dev.interface(ethernet(ifid)).acl_in = name
                dev.acls[name] = [AclRule("deny", "any", f"host {ACL_DUMMY_HOST}"), AclRule("permit", "any", "any")]
            if "acl-out" in feats:
                ifid = ifaces[-1][0]
                name = f"ACL_OUT_{ethernet(ifid).upper()}"
                dev.interface(ethernet(ifid)).acl_out = name
                dev.acls[name] = [AclRule("deny", "any", f"host {ACL_DUMMY_HOST}"), AclRule("permit", "any", "any")]
        if bgp_on and r in ap.speakers:
            bgp = BgpProcess(asn=ap.asn, router_id=plan.router_ids[r])
            if r in ap.reflectors:
                bgp.cluster_id = plan.router_ids[r]
            bgp.networks = list(plan.advertisements.get(r, []))
            for s in plan.sessions:
                if r not in (s.a, s.b):
                    continue
                peer = s.b if s.a == r else s.a
                peer_addr = s.b_addr if s.a == r else s.a_addr
                n = Neighbor(peer_addr, remote_as=plan.router_asn[peer])
                if s.kind == "ebgp":
                    n.description = f"ebgp {peer}"
                    n.route_map_in = s.route_map_in.get(r)
                    n.route_map_out = s.route_map_out.get(r)
                else:
                    n.description = f"ibgp {peer}"
                    n.update_source = "Loopback0"
                    if s.kind == "rr-client" and r == s.a:
                        n.rr_client = True
                    if r in ap.asbrs:
                        n.next_hop_self = True
                bgp.neighbors.append(n)
            bgp.neighbors.sort(key=lambda n: ipaddress.IPv4Address(n.address))
            dev.bgp = bgp
            has_ebgp = any(n.route_map_out for n in bgp.neighbors)
            if has_ebgp:
                dev.prefix_lists[CUSTOMER_LIST] = [
                    PrefixListEntry(5 * (i + 1), "permit", p) for i, p in enumerate(bgp_lans)
                ]
            for n in bgp.neighbors:
                if n.route_map_in:
                    peer = n.description.split()[-1]
                    pref = PREFERRED_LOCAL_PREF if preferred_import == f"{r}>{peer}" else DEFAULT_LOCAL_PREF
                    dev.route_maps[n.route_map_in] = [RouteMapClause(10, "permit", set_local_pref=pref)]
                if n.route_map_out:
                    dev.route_maps[n.route_map_out] = [RouteMapClause(10, "permit", match_prefix_list=CUSTOMER_LIST)]
            dev.route_maps = dict(sorted(dev.route_maps.items()))
        for st in plan.statics:
            if st["router"] == r:
                dev.statics.append(StaticRoute(st["prefix"], st["next_hop"]))
        devices[r] = dev
    return devices


# -- invariants ----------------------------------------------------------------


def check_plan(plan: LogicalPlan) -> list[str]:
    """Return a list of violated plan invariants (empty for a sound plan)."""
    problems: list[str] = []
    t = plan.topology
    for r, dev in plan.devices.items():
        if dev.bgp:
            for n in dev.bgp.neighbors:
                for rm in (n.route_map_in, n.route_map_out):
                    if rm and rm not in dev.route_maps:
                        problems.append(f"{r}: undefined route-map {rm}")
        for name, clauses in dev.route_maps.items():
            for c in clauses:
                if c.match_prefix_list and c.match_prefix_list not in dev.prefix_lists:
                    problems.append(f"{r}: route-map {name} references undefined prefix-list")
        for i in dev.interfaces:
            for acl in (i.acl_in, i.acl_out):
                if acl and acl not in dev.acls:
                    problems.append(f"{r}: undefined acl {acl}")
            if i.ospf_area is not None and dev.ospf is None:
                problems.append(f"{r}: ospf interface without process")
    for a, ia, b, ib in t.links:
        ia_ = plan.devices[a].interface(ethernet(ia))
        ib_ = plan.devices[b].interface(ethernet(ib))
        if ia_.network != ib_.network:
            problems.append(f"link {a}-{b}: endpoints in different subnets")
    for s in plan.sessions:
        if s.kind != "ebgp":
            continue
        for me, peer, peer_addr in ((s.a, s.b, s.b_addr), (s.b, s.a, s.a_addr)):
            n = plan.devices[me].bgp.neighbor(peer_addr)
            if n is None or n.remote_as != plan.devices[peer].bgp.asn:
                problems.append(f"ebgp {me}->{peer}: remote-as mismatch")
    for ap in plan.ases:
        if not is_connected(ap.members, [(a, b) for a, _, b, _ in t.links]):
            problems.append(f"AS{ap.asn} not connected")
        if ap.igp == "ospf" and ap.multi:
            backbone = [r for r in ap.members if ap.areas[r] == 0]
            if not is_connected(backbone, [(a, b) for a, _, b, _ in t.links]):
                problems.append(f"AS{ap.asn} backbone area not connected")
    for r, dev in plan.devices.items():
        if not dev.bgp:
            continue
        local = {str(i.network) for i in dev.interfaces if i.network is not None}
        backed = {s.prefix for s in dev.statics}
        ap = plan.as_of(r)
        if ap.redistribute:
            backed |= {plan.lans[m] for m in ap.members}
        for p in dev.bgp.networks:
            if p not in local and p not in backed:
                problems.append(f"{r}: network {p} neither local nor static-backed")
    los = list(plan.loopbacks.values())
    if len(set(los)) != len(los) or len(set(plan.router_ids.values())) != len(los):
        problems.append("loopbacks or router-ids not unique")
    subnets = [ipaddress.IPv4Network(s) for s in plan.link_subnets.values()]
    if len({s for s in subnets}) != len(subnets):
        problems.append("overlapping link subnets")
    return problems
