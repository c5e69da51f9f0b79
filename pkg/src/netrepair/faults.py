"""Fault catalog, applicability surfaces, injection into logical plans, ground-truth diffs."""

from __future__ import annotations

import difflib
import ipaddress
import json
import random
from dataclasses import dataclass, field
from importlib import resources
from typing import Callable

from netrepair.configtext.edits import Edit, EditScript, MatchFailure, apply_edits
from netrepair.configtext.model import AclRule, ethernet
from netrepair.configtext.render import render_devices
from netrepair.plan import LogicalPlan
from netrepair.simulator import ForwardingTable

EXTREME_OSPF_COST = 65535
LOWERED_LOCAL_PREF = 50
INVALID_NEXT_HOP_POOL = ipaddress.IPv4Network("10.255.255.0/24")
FOREIGN_SUBNET_POOL = ipaddress.IPv4Network("10.254.0.0/16")
WRONG_ISIS_AREA = "49.0099"
MAX_ORPHANED_CLIENTS = 4


class FaultError(ValueError):
    pass


@dataclass(frozen=True)
class FaultKind:
    id: str
    protocol_class: str
    summary: str
    effect: str
    required_features: tuple[str, ...]

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "class": self.protocol_class,
            "summary": self.summary,
            "expected_effect": self.effect,
            "required_features": list(self.required_features),
        }


def _load_catalog() -> tuple[FaultKind, ...]:
    doc = json.loads(resources.files("netrepair").joinpath("data/fault_catalog.json").read_text())
    return tuple(
        FaultKind(e["id"], e["class"], e["summary"], e["expected_effect"], tuple(e["required_features"]))
        for e in doc["faults"]
    )


CATALOG: tuple[FaultKind, ...] = _load_catalog()
KINDS: dict[str, FaultKind] = {k.id: k for k in CATALOG}


def catalog_document() -> dict:
    return {"faults": [k.to_dict() for k in CATALOG]}


def kind_pair_feasible(a: str, b: str) -> bool:
    """Every pair of kinds can co-occur: distinct bindings always exist on some plan.

    Two instances only clash when they bind the identical target, which the
    generator avoids at target-selection time.
    """
    return a in KINDS and b in KINDS


@dataclass
class FaultInstance:
    kind: str
    binding: dict
    parameters: dict = field(default_factory=dict)

    def target_key(self) -> tuple:
        return _TARGET_KEY[self.kind](self.binding)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "binding": self.binding, "parameters": self.parameters}

    @classmethod
    def from_dict(cls, d: dict) -> "FaultInstance":
        return cls(d["kind"], dict(d["binding"]), dict(d.get("parameters", {})))


# -- surfaces ----------------------------------------------------------------


def _ebgp_endpoints(plan: LogicalPlan):
    for s in plan.sessions:
        if s.kind != "ebgp":
            continue
        for me, peer, peer_addr in ((s.a, s.b, s.b_addr), (s.b, s.a, s.a_addr)):
            dev = plan.devices[me]
            if dev.bgp is None:
                continue
            n = dev.bgp.neighbor(peer_addr)
            if n is not None:
                yield me, peer, n


def _all_neighbors(plan: LogicalPlan):
    for r in sorted(plan.devices):
        dev = plan.devices[r]
        if dev.bgp is not None:
            for n in dev.bgp.neighbors:
                yield r, n


def _link_interfaces(plan: LogicalPlan):
    t = plan.topology
    for a, ia, b, ib in t.links:
        for r, ifid, peer in ((a, ia, b), (b, ib, a)):
            i = plan.devices[r].interface(ethernet(ifid))
            if i is not None:
                yield r, i, peer


def _same_as(plan: LogicalPlan, a: str, b: str) -> bool:
    return plan.router_asn[a] == plan.router_asn[b]


def _max_asn(plan: LogicalPlan) -> int:
    asns = [a.asn for a in plan.ases]
    asns += [d.bgp.asn for d in plan.devices.values() if d.bgp is not None]
    return max(asns)


def _t_wrong_remote_as(plan, rng):
    new_as = _max_asn(plan) + 1
    return [
        ({"router": r, "neighbor": n.address}, {"remote_as": new_as})
        for r, _peer, n in _ebgp_endpoints(plan)
        if n.remote_as != new_as
    ]


def _t_shutdown(plan, rng):
    return [({"router": r, "neighbor": n.address}, {}) for r, n in _all_neighbors(plan) if not n.shutdown]


def _t_wrong_local_as(plan, rng):
    new_as = _max_asn(plan) + 2
    return [
        ({"router": r}, {"asn": new_as})
        for r in sorted(plan.devices)
        if plan.devices[r].bgp is not None and plan.devices[r].bgp.neighbors
    ]


def _t_invalid_next_hop(plan, rng):
    out = []
    for r, _peer, n in _ebgp_endpoints(plan):
        rm = plan.devices[r].route_maps.get(n.route_map_out or "")
        if rm and any(c.action == "permit" for c in rm):
            host = 1 + (rng.randrange(254) if rng else 0)
            out.append(({"router": r, "neighbor": n.address}, {"next_hop": str(INVALID_NEXT_HOP_POOL.network_address + host)}))
    return out


def _t_remove_nhs(plan, rng):
    out = []
    for ap in plan.ases:
        for rr in ap.reflectors:
            dev = plan.devices[rr]
            if dev.bgp is not None and any(n.rr_client and n.next_hop_self for n in dev.bgp.neighbors):
                out.append(({"router": rr}, {}))
    return out


def _t_withdraw_network(plan, rng):
    return [
        ({"router": r, "prefix": p}, {})
        for r in sorted(plan.devices)
        if plan.devices[r].bgp is not None
        for p in plan.devices[r].bgp.networks
    ]


def _t_remove_out_map(plan, rng):
    return [({"router": r, "neighbor": n.address}, {}) for r, _p, n in _ebgp_endpoints(plan) if n.route_map_out]


def _t_swap_maps(plan, rng):
    return [
        ({"router": r, "neighbor": n.address}, {})
        for r, n in _all_neighbors(plan)
        if n.route_map_in and n.route_map_out and n.route_map_in != n.route_map_out
    ]


def _t_leak_loopback(plan, rng):
    out = []
    for r, peer, n in _ebgp_endpoints(plan):
        pdev = plan.devices[peer]
        back = None
        for m in pdev.bgp.neighbors if pdev.bgp else []:
            if m.address in plan.devices[r].addresses():
                back = m
        if n.route_map_out or (back is not None and back.route_map_in):
            out.append(({"router": r, "neighbor": n.address, "peer": peer}, {}))
        else:
            lo = plan.devices[r].interface("Loopback0")
            if lo is not None and plan.devices[r].bgp and f"{lo.ip}/32" not in plan.devices[r].bgp.networks:
                out.append(({"router": r, "neighbor": n.address, "peer": peer}, {}))
    return out


def _rr_clients_connected(plan: LogicalPlan, rr: str) -> list[str]:
    dev = plan.devices[rr]
    if dev.bgp is None:
        return []
    addr_owner = {plan.loopbacks[c]: c for c in plan.loopbacks}
    return sorted(addr_owner[n.address] for n in dev.bgp.neighbors if n.rr_client and n.address in addr_owner)


def _t_orphan_clients(plan, rng):
    out = []
    for ap in plan.ases:
        if not ap.reflectors:
            continue
        clients = sorted({c for rr in ap.reflectors for c in _rr_clients_connected(plan, rr)})
        if not clients:
            continue
        count = 1 + (rng.randrange(min(MAX_ORPHANED_CLIENTS, len(clients))) if rng else 0)
        chosen = sorted(rng.sample(clients, count)) if rng else clients[:count]
        out.append(({"asn": ap.asn, "clients": chosen}, {"count": count}))
    return out


def _t_dup_cluster(plan, rng):
    out = []
    for ap in plan.ases:
        if len(ap.reflectors) < 2:
            continue
        rr_a, rr_b = ap.reflectors[0], ap.reflectors[1]
        on_a = _rr_clients_connected(plan, rr_a)
        if not on_a:
            continue
        count = max(1, len(on_a) // 2)
        chosen = sorted(rng.sample(on_a, count)) if rng else on_a[:count]
        cid = plan.devices[rr_a].bgp.cluster_id or plan.devices[rr_a].bgp.router_id
        if plan.devices[rr_b].bgp.cluster_id == cid:
            continue
        out.append(({"asn": ap.asn, "rr_a": rr_a, "rr_b": rr_b, "clients": chosen}, {"cluster_id": cid}))
    return out


def _t_ospf_cost(plan, rng):
    return [
        ({"router": r, "interface": i.name}, {"cost": EXTREME_OSPF_COST})
        for r, i, _p in _link_interfaces(plan)
        if i.ospf_area is not None and i.ospf_cost != EXTREME_OSPF_COST
    ]


def _t_ospf_disable(plan, rng):
    return [({"router": r, "interface": i.name}, {}) for r, i, _p in _link_interfaces(plan) if i.ospf_area is not None]


def _t_ospf_missing_area(plan, rng):
    return [
        ({"router": r}, {})
        for r in sorted(plan.devices)
        if plan.devices[r].ospf is not None and any(i.ospf_area is not None for i in plan.devices[r].interfaces)
    ]


def _t_ospf_dup_rid(plan, rng):
    out = []
    for a, _ia, b, _ib in plan.topology.links:
        da, db = plan.devices[a], plan.devices[b]
        if da.ospf is None or db.ospf is None or not _same_as(plan, a, b):
            continue
        if da.ospf.router_id and da.ospf.router_id != db.ospf.router_id:
            out.append(({"router": b, "source": a}, {"router_id": da.ospf.router_id}))
        if db.ospf.router_id and db.ospf.router_id != da.ospf.router_id:
            out.append(({"router": a, "source": b}, {"router_id": db.ospf.router_id}))
    return out


def _t_isis_disable(plan, rng):
    return [({"router": r, "interface": i.name}, {}) for r, i, peer in _link_interfaces(plan) if i.isis]


def _t_isis_demote(plan, rng):
    return [
        ({"router": r}, {})
        for r in sorted(plan.devices)
        if plan.devices[r].isis is not None and plan.devices[r].isis.is_type == "level-1-2"
    ]


def _t_isis_wrong_area(plan, rng):
    return [
        ({"router": r}, {"area": WRONG_ISIS_AREA})
        for r in sorted(plan.devices)
        if plan.devices[r].isis is not None and plan.devices[r].isis.area != WRONG_ISIS_AREA
    ]


def _t_dup_loopback(plan, rng):
    out = []
    for a, _ia, b, _ib in plan.topology.links:
        for x, y in ((a, b), (b, a)):
            lx = plan.devices[x].interface("Loopback0")
            ly = plan.devices[y].interface("Loopback0")
            if lx is not None and ly is not None and lx.ip and lx.ip != ly.ip:
                out.append(({"router": y, "source": x}, {"address": lx.ip}))
    return out


def _t_mask_mismatch(plan, rng):
    return [
        ({"router": r, "interface": i.name}, {"mask_len": i.mask_len - 1})
        for r, i, _p in _link_interfaces(plan)
        if i.ip and i.mask_len and i.mask_len > 24
    ]


def _t_diff_subnets(plan, rng):
    out = []
    for n, (r, i, _p) in enumerate(_link_interfaces(plan)):
        if not i.ip or ipaddress.IPv4Address(i.ip) in FOREIGN_SUBNET_POOL:
            continue
        offset = 2 * (rng.randrange(1 << 14) if rng else n)
        out.append(({"router": r, "interface": i.name}, {"address": str(FOREIGN_SUBNET_POOL.network_address + offset)}))
    return out


def _t_static_remove(plan, rng):
    return [({"router": r, "prefix": s.prefix}, {}) for r in sorted(plan.devices) for s in plan.devices[r].statics]


def _t_pl_entry(plan, rng):
    return [
        ({"router": r, "list": name, "seq": e.seq}, {})
        for r in sorted(plan.devices)
        for name, entries in sorted(plan.devices[r].prefix_lists.items())
        for e in entries
        if e.action == "permit"
    ]


def _t_rm_deny(plan, rng):
    return [
        ({"router": r, "map": name, "seq": c.seq}, {})
        for r in sorted(plan.devices)
        for name, clauses in sorted(plan.devices[r].route_maps.items())
        for c in clauses
        if c.action == "permit"
    ]


def _t_lower_lp(plan, rng):
    return [
        ({"router": r, "map": name, "seq": c.seq}, {"local_pref": LOWERED_LOCAL_PREF})
        for r in sorted(plan.devices)
        for name, clauses in sorted(plan.devices[r].route_maps.items())
        for c in clauses
        if c.set_local_pref is not None and c.set_local_pref > LOWERED_LOCAL_PREF
    ]


def _t_redist(plan, rng):
    return [
        ({"router": r}, {})
        for r in sorted(plan.devices)
        if plan.devices[r].ospf is not None and plan.devices[r].ospf.redistribute_bgp is not None
    ]


def _acl_targets(direction: str):
    def targets(plan, rng):
        out = []
        for r in sorted(plan.devices):
            dev = plan.devices[r]
            for i in dev.interfaces:
                name = i.acl_in if direction == "in" else i.acl_out
                if name and name in dev.acls:
                    rules = dev.acls[name]
                    if rules and rules[0].action == "deny" and rules[0].src == "any" and rules[0].dst == "any":
                        continue
                    out.append(({"router": r, "interface": i.name, "acl": name}, {}))
        return out

    return targets


# -- effects -----------------------------------------------------------------


def _neighbor(plan, b):
    dev = plan.devices.get(b["router"])
    n = dev.bgp.neighbor(b["neighbor"]) if dev is not None and dev.bgp is not None else None
    if n is None:
        raise FaultError(f"no neighbor {b['neighbor']} on {b['router']}")
    return dev, n


def _iface(plan, b):
    dev = plan.devices.get(b["router"])
    i = dev.interface(b["interface"]) if dev is not None else None
    if i is None:
        raise FaultError(f"no interface {b['interface']} on {b['router']}")
    return dev, i


def _a_wrong_remote_as(plan, b, p):
    _, n = _neighbor(plan, b)
    n.remote_as = p["remote_as"]


def _a_shutdown(plan, b, p):
    _, n = _neighbor(plan, b)
    n.shutdown = True


def _a_wrong_local_as(plan, b, p):
    plan.devices[b["router"]].bgp.asn = p["asn"]


def _a_invalid_next_hop(plan, b, p):
    dev, n = _neighbor(plan, b)
    clauses = dev.route_maps.get(n.route_map_out or "")
    if not clauses:
        raise FaultError("outbound route-map missing")
    for c in clauses:
        if c.action == "permit":
            c.set_next_hop = p["next_hop"]


def _a_remove_nhs(plan, b, p):
    dev = plan.devices[b["router"]]
    hit = False
    for n in dev.bgp.neighbors:
        if n.next_hop_self and n.update_source:
            n.next_hop_self = False
            hit = True
    if not hit:
        raise FaultError("no next-hop-self to remove")


def _a_withdraw_network(plan, b, p):
    nets = plan.devices[b["router"]].bgp.networks
    if b["prefix"] not in nets:
        raise FaultError("network statement missing")
    nets.remove(b["prefix"])


def _a_remove_out_map(plan, b, p):
    _, n = _neighbor(plan, b)
    n.route_map_out = None


def _a_swap_maps(plan, b, p):
    _, n = _neighbor(plan, b)
    n.route_map_in, n.route_map_out = n.route_map_out, n.route_map_in


def _a_leak_loopback(plan, b, p):
    dev, n = _neighbor(plan, b)
    lo = dev.interface("Loopback0")
    net = f"{lo.ip}/32"
    if net not in dev.bgp.networks:
        dev.bgp.networks.append(net)
    n.route_map_out = None
    pdev = plan.devices[b["peer"]]
    for m in pdev.bgp.neighbors:
        if m.address in dev.addresses():
            m.route_map_in = None


def _drop_session(plan, x: str, y: str) -> bool:
    dx, dy = plan.devices[x], plan.devices[y]
    before = len(dx.bgp.neighbors) + len(dy.bgp.neighbors)
    dx.bgp.neighbors = [n for n in dx.bgp.neighbors if n.address != plan.loopbacks[y]]
    dy.bgp.neighbors = [n for n in dy.bgp.neighbors if n.address != plan.loopbacks[x]]
    return len(dx.bgp.neighbors) + len(dy.bgp.neighbors) < before


def _a_orphan_clients(plan, b, p):
    ap = next(a for a in plan.ases if a.asn == b["asn"])
    hit = False
    for c in b["clients"]:
        for rr in ap.reflectors:
            hit |= _drop_session(plan, rr, c)
    if not hit:
        raise FaultError("no client sessions left to remove")


def _a_dup_cluster(plan, b, p):
    plan.devices[b["rr_b"]].bgp.cluster_id = p["cluster_id"]
    for c in b["clients"]:
        _drop_session(plan, b["rr_a"], c)


def _a_ospf_cost(plan, b, p):
    _, i = _iface(plan, b)
    i.ospf_cost = p["cost"]


def _a_ospf_disable(plan, b, p):
    _, i = _iface(plan, b)
    if i.ospf_area is None:
        raise FaultError("interface not in OSPF")
    i.ospf_area = None


def _a_ospf_missing_area(plan, b, p):
    for i in plan.devices[b["router"]].interfaces:
        i.ospf_area = None


def _a_ospf_dup_rid(plan, b, p):
    plan.devices[b["router"]].ospf.router_id = p["router_id"]


def _a_isis_disable(plan, b, p):
    _, i = _iface(plan, b)
    i.isis = False


def _a_isis_demote(plan, b, p):
    plan.devices[b["router"]].isis.is_type = "level-1"


def _a_isis_wrong_area(plan, b, p):
    proc = plan.devices[b["router"]].isis
    tail = proc.net.split(".")[-4:]
    proc.net = ".".join([p["area"], *tail])


def _a_dup_loopback(plan, b, p):
    plan.devices[b["router"]].interface("Loopback0").ip = p["address"]


def _a_mask_mismatch(plan, b, p):
    _, i = _iface(plan, b)
    i.mask_len = p["mask_len"]


def _a_diff_subnets(plan, b, p):
    _, i = _iface(plan, b)
    i.ip = p["address"]


def _a_static_remove(plan, b, p):
    dev = plan.devices[b["router"]]
    kept = [s for s in dev.statics if s.prefix != b["prefix"]]
    if len(kept) == len(dev.statics):
        raise FaultError("static route missing")
    dev.statics = kept


def _a_pl_entry(plan, b, p):
    entries = plan.devices[b["router"]].prefix_lists.get(b["list"], [])
    kept = [e for e in entries if e.seq != b["seq"]]
    if len(kept) == len(entries):
        raise FaultError("prefix-list entry missing")
    plan.devices[b["router"]].prefix_lists[b["list"]] = kept


def _clause(plan, b):
    for c in plan.devices[b["router"]].route_maps.get(b["map"], []):
        if c.seq == b["seq"]:
            return c
    raise FaultError("route-map clause missing")


def _a_rm_deny(plan, b, p):
    _clause(plan, b).action = "deny"


def _a_lower_lp(plan, b, p):
    _clause(plan, b).set_local_pref = p["local_pref"]


def _a_redist(plan, b, p):
    plan.devices[b["router"]].ospf.redistribute_bgp = None


def _a_acl_top(plan, b, p):
    rules = plan.devices[b["router"]].acls.get(b["acl"])
    if rules is None:
        raise FaultError("ACL missing")
    rules.insert(0, AclRule("deny", "any", "any"))


_SURFACE: dict[str, Callable] = {
    "bgp-wrong-remote-as": _t_wrong_remote_as,
    "bgp-neighbor-shutdown": _t_shutdown,
    "bgp-wrong-local-as": _t_wrong_local_as,
    "bgp-invalid-next-hop": _t_invalid_next_hop,
    "bgp-remove-nhs-rr-client": _t_remove_nhs,
    "bgp-withdraw-network": _t_withdraw_network,
    "bgp-remove-outbound-route-map": _t_remove_out_map,
    "bgp-swap-route-maps": _t_swap_maps,
    "bgp-leak-loopback": _t_leak_loopback,
    "bgp-orphan-rr-clients": _t_orphan_clients,
    "bgp-duplicate-cluster-id": _t_dup_cluster,
    "ospf-extreme-cost": _t_ospf_cost,
    "ospf-disable-adjacency": _t_ospf_disable,
    "ospf-missing-area": _t_ospf_missing_area,
    "ospf-duplicate-router-id": _t_ospf_dup_rid,
    "isis-disable-link": _t_isis_disable,
    "isis-demote-l12": _t_isis_demote,
    "isis-wrong-area": _t_isis_wrong_area,
    "addr-duplicate-loopback": _t_dup_loopback,
    "addr-mask-mismatch": _t_mask_mismatch,
    "addr-different-subnets": _t_diff_subnets,
    "static-remove": _t_static_remove,
    "policy-remove-prefix-list-entry": _t_pl_entry,
    "policy-route-map-permit-to-deny": _t_rm_deny,
    "policy-lower-local-pref": _t_lower_lp,
    "redist-drop-bgp-ospf": _t_redist,
    "acl-in-deny-top": _acl_targets("in"),
    "acl-out-deny-top": _acl_targets("out"),
}

_EFFECT: dict[str, Callable] = {
    "bgp-wrong-remote-as": _a_wrong_remote_as,
    "bgp-neighbor-shutdown": _a_shutdown,
    "bgp-wrong-local-as": _a_wrong_local_as,
    "bgp-invalid-next-hop": _a_invalid_next_hop,
    "bgp-remove-nhs-rr-client": _a_remove_nhs,
    "bgp-withdraw-network": _a_withdraw_network,
    "bgp-remove-outbound-route-map": _a_remove_out_map,
    "bgp-swap-route-maps": _a_swap_maps,
    "bgp-leak-loopback": _a_leak_loopback,
    "bgp-orphan-rr-clients": _a_orphan_clients,
    "bgp-duplicate-cluster-id": _a_dup_cluster,
    "ospf-extreme-cost": _a_ospf_cost,
    "ospf-disable-adjacency": _a_ospf_disable,
    "ospf-missing-area": _a_ospf_missing_area,
    "ospf-duplicate-router-id": _a_ospf_dup_rid,
    "isis-disable-link": _a_isis_disable,
    "isis-demote-l12": _a_isis_demote,
    "isis-wrong-area": _a_isis_wrong_area,
    "addr-duplicate-loopback": _a_dup_loopback,
    "addr-mask-mismatch": _a_mask_mismatch,
    "addr-different-subnets": _a_diff_subnets,
    "static-remove": _a_static_remove,
    "policy-remove-prefix-list-entry": _a_pl_entry,
    "policy-route-map-permit-to-deny": _a_rm_deny,
    "policy-lower-local-pref": _a_lower_lp,
    "redist-drop-bgp-ospf": _a_redist,
    "acl-in-deny-top": _a_acl_top,
    "acl-out-deny-top": _a_acl_top,
}


def _key_neighbor(b):
    return ("neighbor", b["router"], b["neighbor"])


def _key_iface(b):
    return ("interface", b["router"], b["interface"])


_TARGET_KEY: dict[str, Callable] = {
    "bgp-wrong-remote-as": _key_neighbor,
    "bgp-neighbor-shutdown": _key_neighbor,
    "bgp-wrong-local-as": lambda b: ("bgp-process", b["router"]),
    "bgp-invalid-next-hop": _key_neighbor,
    "bgp-remove-nhs-rr-client": lambda b: ("bgp-process", b["router"]),
    "bgp-withdraw-network": lambda b: ("network", b["router"], b["prefix"]),
    "bgp-remove-outbound-route-map": _key_neighbor,
    "bgp-swap-route-maps": _key_neighbor,
    "bgp-leak-loopback": _key_neighbor,
    "bgp-orphan-rr-clients": lambda b: ("rr-clients", b["asn"], tuple(b["clients"])),
    "bgp-duplicate-cluster-id": lambda b: ("cluster-id", b["asn"]),
    "ospf-extreme-cost": _key_iface,
    "ospf-disable-adjacency": _key_iface,
    "ospf-missing-area": lambda b: ("igp-process", b["router"]),
    "ospf-duplicate-router-id": lambda b: ("router-id", b["router"]),
    "isis-disable-link": _key_iface,
    "isis-demote-l12": lambda b: ("igp-process", b["router"]),
    "isis-wrong-area": lambda b: ("igp-process", b["router"]),
    "addr-duplicate-loopback": lambda b: ("loopback", b["router"]),
    "addr-mask-mismatch": _key_iface,
    "addr-different-subnets": _key_iface,
    "static-remove": lambda b: ("static", b["router"], b["prefix"]),
    "policy-remove-prefix-list-entry": lambda b: ("prefix-list", b["router"], b["list"], b["seq"]),
    "policy-route-map-permit-to-deny": lambda b: ("route-map", b["router"], b["map"], b["seq"]),
    "policy-lower-local-pref": lambda b: ("route-map", b["router"], b["map"], b["seq"]),
    "redist-drop-bgp-ospf": lambda b: ("redistribution", b["router"]),
    "acl-in-deny-top": lambda b: ("acl", b["router"], b["acl"]),
    "acl-out-deny-top": lambda b: ("acl", b["router"], b["acl"]),
}

assert set(_SURFACE) == set(_EFFECT) == set(_TARGET_KEY) == set(KINDS)


def applicable_targets(plan: LogicalPlan, kind: str | FaultKind, rng: random.Random | None = None) -> list[FaultInstance]:
    """Every binding of ``kind`` on ``plan``; each one changes at least one rendered line.

    With ``rng`` the kind-specific random parameters (orphaned clients, invalid
    next-hop address, foreign subnet) are drawn from it; otherwise deterministic
    defaults are used.
    """
    kid = kind.id if isinstance(kind, FaultKind) else kind
    if kid not in KINDS:
        raise FaultError(f"unknown fault kind {kid!r}")
    return [FaultInstance(kid, b, p) for b, p in _SURFACE[kid](plan, rng)]


# -- ground-truth diff ---------------------------------------------------------


@dataclass
class Hunk:
    router: str
    before: list[str]
    after: list[str]
    search: list[str]
    replace: list[str]
    fault_ids: list[str]

    def to_dict(self) -> dict:
        return {
            "router": self.router,
            "before": self.before,
            "after": self.after,
            "search": self.search,
            "replace": self.replace,
            "fault_ids": self.fault_ids,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Hunk":
        return cls(d["router"], d["before"], d["after"], d["search"], d["replace"], d["fault_ids"])


@dataclass
class GroundTruthDiff:
    hunks: list[Hunk]
    faults: list[FaultInstance]
    affected_routers: list[str]
    lines_edited: int

    def repair_script(self) -> EditScript:
        """Edit script that turns the broken configurations back into the golden ones."""
        return EditScript([Edit(h.router, list(h.search), list(h.replace)) for h in self.hunks])

    def to_dict(self) -> dict:
        return {
            "faults": [f.to_dict() for f in self.faults],
            "affected_routers": self.affected_routers,
            "lines_edited": self.lines_edited,
            "hunks": [h.to_dict() for h in self.hunks],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "GroundTruthDiff":
        return cls(
            [Hunk.from_dict(h) for h in d["hunks"]],
            [FaultInstance.from_dict(f) for f in d["faults"]],
            list(d["affected_routers"]),
            int(d["lines_edited"]),
        )


def _lines(text: str) -> list[str]:
    return text.split("\n")[:-1] if text.endswith("\n") else text.split("\n")


def _count_occurrences(lines: list[str], block: list[str]) -> int:
    n = len(block)
    return sum(1 for i in range(len(lines) - n + 1) if lines[i : i + n] == block)


def _unique(lines: list[str], block: list[str]) -> bool:
    return bool(block) and _count_occurrences(lines, block) == 1


def _expand(gold: list[str], broken: list[str], i1, i2, j1, j2):
    # grow symmetric context until both sides of the hunk occur exactly once
    c = 0
    while True:
        lo_j, hi_j = max(0, j1 - c), min(len(broken), j2 + c)
        lo_i, hi_i = i1 - (j1 - lo_j), i2 + (hi_j - j2)
        if _unique(broken, broken[lo_j:hi_j]) and _unique(gold, gold[lo_i:hi_i]):
            return lo_i, hi_i, lo_j, hi_j
        if lo_j == 0 and hi_j == len(broken):
            return lo_i, hi_i, lo_j, hi_j
        c += 1


def router_hunks(router: str, gold_text: str, broken_text: str) -> tuple[list[tuple], int]:
    """Diff one router's text into uniquely-locatable hunks (index ranges) and an edit-line count."""
    gold, broken = _lines(gold_text), _lines(broken_text)
    ops = [op for op in difflib.SequenceMatcher(None, gold, broken, autojunk=False).get_opcodes() if op[0] != "equal"]
    edited = sum(max(i2 - i1, j2 - j1) for _t, i1, i2, j1, j2 in ops)
    spans = [_expand(gold, broken, i1, i2, j1, j2) for _t, i1, i2, j1, j2 in ops]
    merged: list[list[int]] = []
    for s in sorted(spans, key=lambda s: (s[2], s[0])):
        if merged and s[2] <= merged[-1][3]:
            m = merged[-1]
            m[0], m[1], m[2], m[3] = min(m[0], s[0]), max(m[1], s[1]), min(m[2], s[2]), max(m[3], s[3])
        else:
            merged.append(list(s))
    hunks = [tuple(m) for m in merged]
    back = EditScript([Edit(router, broken[j1:j2], gold[i1:i2]) for i1, i2, j1, j2 in hunks])
    forth = EditScript([Edit(router, gold[i1:i2], broken[j1:j2]) for i1, i2, j1, j2 in hunks])
    try:
        ok = (apply_edits({router: broken_text}, back)[router] == gold_text
              and apply_edits({router: gold_text}, forth)[router] == broken_text)
    except MatchFailure:
        ok = False
    if not ok:
        i1, i2 = min(h[0] for h in hunks), max(h[1] for h in hunks)
        j1, j2 = min(h[2] for h in hunks), max(h[3] for h in hunks)
        hunks = [(i1, i2, j1, j2)]
    return hunks, edited


def build_diff(
    golden: dict[str, str],
    broken: dict[str, str],
    faults: list[FaultInstance],
    steps: list[dict[str, str]] | None = None,
) -> GroundTruthDiff:
    """Ground-truth diff between golden and broken texts.

    ``steps`` are the renders after each successive fault; they attribute each
    hunk to the faults whose individual change touched the hunk's lines.
    """
    touched: list[tuple[str, set[str], set[str]]] = []
    if steps is not None:
        prev = golden
        for f, cur in zip(faults, steps):
            for r in sorted(cur):
                if prev.get(r) != cur.get(r):
                    a, b = _lines(prev.get(r, "")), _lines(cur.get(r, ""))
                    sm = difflib.SequenceMatcher(None, a, b, autojunk=False)
                    removed, added = set(), set()
                    for tag, i1, i2, j1, j2 in sm.get_opcodes():
                        if tag != "equal":
                            removed.update(a[i1:i2])
                            added.update(b[j1:j2])
                    touched.append((f.kind, {r}, removed | added))
            prev = cur
    hunks: list[Hunk] = []
    total = 0
    affected = []
    for r in sorted(golden):
        if golden[r] == broken.get(r):
            continue
        affected.append(r)
        gold, brk = _lines(golden[r]), _lines(broken[r])
        spans, edited = router_hunks(r, golden[r], broken[r])
        total += edited
        for i1, i2, j1, j2 in spans:
            changed = set(gold[i1:i2]) ^ set(brk[j1:j2])
            ids = sorted({k for k, rs, lines in touched if r in rs and lines & (changed or set(brk[j1:j2]))})
            if not ids and steps is not None:
                ids = sorted({k for k, rs, _l in touched if r in rs})
            hunks.append(Hunk(r, gold[i1:i2], brk[j1:j2], brk[j1:j2], gold[i1:i2], ids))
    return GroundTruthDiff(hunks, list(faults), affected, total)


# -- injection ---------------------------------------------------------------


def apply_fault(plan: LogicalPlan, fault: FaultInstance) -> None:
    if fault.kind not in _EFFECT:
        raise FaultError(f"unknown fault kind {fault.kind!r}")
    try:
        _EFFECT[fault.kind](plan, fault.binding, fault.parameters)
    except (KeyError, AttributeError, StopIteration) as exc:
        raise FaultError(f"inapplicable binding for {fault.kind}: {exc}") from None


def inject(plan: LogicalPlan, faults: list[FaultInstance], seed: int = 0) -> tuple[LogicalPlan, GroundTruthDiff]:
    """Apply ``faults`` in order to a copy of ``plan``.

    Raises:
        FaultError: on an empty fault list, clashing bindings, or a binding that
            does not exist or produces no textual change.
    """
    if not faults:
        raise FaultError("no faults")
    keys = [f.target_key() for f in faults]
    if len(set(keys)) != len(keys):
        raise FaultError("conflicting bindings: two faults share a target")
    broken = plan.copy()
    golden_text = render_devices(plan.devices)
    steps = []
    prev = golden_text
    for f in faults:
        apply_fault(broken, f)
        cur = render_devices(broken.devices)
        if cur == prev:
            raise FaultError(f"fault {f.kind} at {f.binding} changes no configuration line")
        steps.append(cur)
        prev = cur
    broken.metadata = dict(broken.metadata, faults=[f.to_dict() for f in faults], inject_seed=seed)
    return broken, build_diff(golden_text, prev, faults, steps)


def validate_tangibility(golden: ForwardingTable, broken: ForwardingTable) -> bool:
    """True iff at least one (router, prefix) entry or a bound ACL differs."""
    if golden.entries != broken.entries:
        return True
    return golden.hop_acls != broken.hop_acls
