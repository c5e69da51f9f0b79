"""Structured per-router configuration model shared by the renderer and parser."""

from __future__ import annotations

import ipaddress
from dataclasses import dataclass, field

GRAMMAR_VERSION = "ios-lite-1"

ISIS_LEVELS = ("level-1", "level-1-2", "level-2-only")


@dataclass
class Interface:
    name: str
    ip: str | None = None
    mask_len: int | None = None
    description: str | None = None
    ospf_area: int | None = None
    ospf_cost: int | None = None
    isis: bool = False
    acl_in: str | None = None
    acl_out: str | None = None

    @property
    def network(self) -> ipaddress.IPv4Network | None:
        if self.ip is None or self.mask_len is None:
            return None
        return ipaddress.IPv4Network(f"{self.ip}/{self.mask_len}", strict=False)

    @property
    def is_loopback(self) -> bool:
        return self.name.lower().startswith("loopback")


@dataclass
class OspfProcess:
    pid: int = 1
    router_id: str | None = None
    redistribute_bgp: int | None = None
    redistribute_metric: int = 20


@dataclass
class IsisProcess:
    net: str
    is_type: str = "level-1-2"

    @property
    def area(self) -> str:
        # 49.0001.1720.2000.0001.00 -> 49.0001
        parts = self.net.split(".")
        return ".".join(parts[:-4]) if len(parts) > 4 else self.net

    @property
    def l1(self) -> bool:
        return self.is_type in ("level-1", "level-1-2")

    @property
    def l2(self) -> bool:
        return self.is_type in ("level-2-only", "level-1-2")


@dataclass
class Neighbor:
    address: str
    remote_as: int | None = None
    description: str | None = None
    update_source: str | None = None
    rr_client: bool = False
    next_hop_self: bool = False
    route_map_in: str | None = None
    route_map_out: str | None = None
    shutdown: bool = False


@dataclass
class BgpProcess:
    asn: int
    router_id: str | None = None
    cluster_id: str | None = None
    networks: list[str] = field(default_factory=list)
    neighbors: list[Neighbor] = field(default_factory=list)

    def neighbor(self, address: str) -> Neighbor | None:
        for n in self.neighbors:
            if n.address == address:
                return n
        return None


@dataclass
class RouteMapClause:
    seq: int
    action: str
    match_prefix_list: str | None = None
    set_local_pref: int | None = None
    set_next_hop: str | None = None


@dataclass
class PrefixListEntry:
    seq: int
    action: str
    prefix: str
    ge: int | None = None
    le: int | None = None

    def matches(self, prefix: ipaddress.IPv4Network) -> bool:
        net = ipaddress.IPv4Network(self.prefix, strict=False)
        if prefix.prefixlen < net.prefixlen or not prefix.subnet_of(net):
            return False
        if self.ge is None and self.le is None:
            return prefix.prefixlen == net.prefixlen
        lo = self.ge if self.ge is not None else net.prefixlen
        hi = self.le if self.le is not None else 32
        return lo <= prefix.prefixlen <= hi


@dataclass
class AclRule:
    action: str
    src: str = "any"
    dst: str = "any"

    def matches(self, src: str, dst: str) -> bool:
        return _acl_term_matches(self.src, src) and _acl_term_matches(self.dst, dst)


def _acl_term_matches(term: str, address: str) -> bool:
    if term == "any":
        return True
    parts = term.split()
    addr = int(ipaddress.IPv4Address(address))
    if parts[0] == "host":
        return addr == int(ipaddress.IPv4Address(parts[1]))
    base = int(ipaddress.IPv4Address(parts[0]))
    wildcard = int(ipaddress.IPv4Address(parts[1]))
    return (addr & ~wildcard & 0xFFFFFFFF) == (base & ~wildcard & 0xFFFFFFFF)


@dataclass
class StaticRoute:
    prefix: str
    next_hop: str


@dataclass
class DeviceModel:
    hostname: str
    interfaces: list[Interface] = field(default_factory=list)
    ospf: OspfProcess | None = None
    isis: IsisProcess | None = None
    bgp: BgpProcess | None = None
    prefix_lists: dict[str, list[PrefixListEntry]] = field(default_factory=dict)
    route_maps: dict[str, list[RouteMapClause]] = field(default_factory=dict)
    statics: list[StaticRoute] = field(default_factory=list)
    acls: dict[str, list[AclRule]] = field(default_factory=dict)
    warnings: list[str] = field(default_factory=list, compare=False)
    dangling: list[str] = field(default_factory=list, compare=False)

    def interface(self, name: str) -> Interface | None:
        for i in self.interfaces:
            if i.name == name:
                return i
        return None

    def addresses(self) -> list[str]:
        return [i.ip for i in self.interfaces if i.ip]


def mask_to_len(mask: str) -> int:
    return ipaddress.IPv4Network(f"0.0.0.0/{mask}").prefixlen


def len_to_mask(length: int) -> str:
    return str(ipaddress.IPv4Network(f"0.0.0.0/{length}").netmask)


def ethernet(ifid: int) -> str:
    return f"Ethernet{ifid}"
