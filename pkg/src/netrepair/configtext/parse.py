"""Parse IOS-style configuration text back into device models.

Unrecognised lines are collected as warnings and otherwise ignored; undefined
policy references are recorded as dangling instead of rejected.
"""

from __future__ import annotations

import ipaddress

from netrepair.configtext.model import (
    ISIS_LEVELS,
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
    mask_to_len,
)


class ConfigParseError(ValueError):
    def __init__(self, router: str, reason: str):
        super().__init__(f"{router}: {reason}")
        self.router = router
        self.reason = reason


def _prefix(addr: str, mask: str) -> str:
    return str(ipaddress.IPv4Network(f"{addr}/{mask}", strict=False))


def _valid_ip(text: str) -> bool:
    try:
        ipaddress.IPv4Address(text)
    except ValueError:
        return False
    return True


def parse_config(text: str, router: str = "?") -> DeviceModel:
    """Parse one router's configuration.

    Raises:
        ConfigParseError: when the file is structurally corrupt (missing the
            closing ``end`` or a stanza header without its mandatory argument).
    """
    dev = DeviceModel(hostname=router)
    stanza: tuple | None = None
    ended = False
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.rstrip()
        if not line.strip():
            continue
        toks = line.split()
        if ended:
            dev.warnings.append(f"line {lineno}: content after 'end': {line.strip()}")
            continue
        if not raw[:1].isspace():
            stanza = None
            try:
                stanza = _top_level(dev, toks, lineno)
            except (ValueError, IndexError) as exc:
                if isinstance(exc, ConfigParseError):
                    raise
                dev.warnings.append(f"line {lineno}: unrecognised: {line.strip()}")
                continue
            if stanza == ("end",):
                ended = True
                stanza = None
            continue
        if stanza is None:
            dev.warnings.append(f"line {lineno}: unrecognised: {line.strip()}")
            continue
        try:
            ok = _sub_line(dev, stanza, toks)
        except (ValueError, IndexError):
            ok = False
        if not ok:
            dev.warnings.append(f"line {lineno}: unrecognised: {line.strip()}")
    if not ended:
        raise ConfigParseError(router, "unterminated configuration (missing 'end')")
    _check_references(dev)
    return dev


def _top_level(dev: DeviceModel, toks: list[str], lineno: int):
    head = toks[0]
    if head == "!":
        return None
    if head == "end" and len(toks) == 1:
        return ("end",)
    if head == "hostname":
        dev.hostname = toks[1]
        return None
    if head == "interface":
        if len(toks) != 2:
            raise ConfigParseError(dev.hostname, f"line {lineno}: malformed interface header")
        iface = dev.interface(toks[1])
        if iface is None:
            iface = Interface(toks[1])
            dev.interfaces.append(iface)
        return ("interface", iface)
    if head == "router" and toks[1] == "ospf":
        if len(toks) != 3:
            raise ConfigParseError(dev.hostname, f"line {lineno}: malformed 'router ospf'")
        if dev.ospf is None:
            dev.ospf = OspfProcess(pid=int(toks[2]))
        return ("ospf",)
    if head == "router" and toks[1] == "isis" and len(toks) == 2:
        if dev.isis is None:
            dev.isis = IsisProcess(net="")
        return ("isis",)
    if head == "router" and toks[1] == "bgp":
        if len(toks) != 3:
            raise ConfigParseError(dev.hostname, f"line {lineno}: malformed 'router bgp'")
        if dev.bgp is None:
            dev.bgp = BgpProcess(asn=int(toks[2]))
        else:
            dev.bgp.asn = int(toks[2])
        return ("bgp",)
    if head == "ip" and toks[1] == "prefix-list":
        # ip prefix-list NAME seq N permit|deny P [ge X] [le Y]
        name, seq, action, prefix = toks[2], int(toks[4]), toks[5], toks[6]
        if toks[3] != "seq" or action not in ("permit", "deny"):
            raise ValueError("bad prefix-list")
        entry = PrefixListEntry(seq, action, str(ipaddress.IPv4Network(prefix, strict=False)))
        rest = toks[7:]
        while rest:
            key, val = rest[0], int(rest[1])
            if key == "ge":
                entry.ge = val
            elif key == "le":
                entry.le = val
            else:
                raise ValueError("bad prefix-list option")
            rest = rest[2:]
        dev.prefix_lists.setdefault(name, []).append(entry)
        dev.prefix_lists[name].sort(key=lambda e: e.seq)
        return None
    if head == "route-map":
        if len(toks) != 4 or toks[2] not in ("permit", "deny"):
            raise ValueError("bad route-map header")
        clause = RouteMapClause(int(toks[3]), toks[2])
        clauses = dev.route_maps.setdefault(toks[1], [])
        clauses[:] = [c for c in clauses if c.seq != clause.seq]
        clauses.append(clause)
        clauses.sort(key=lambda c: c.seq)
        return ("route-map", clause)
    if head == "ip" and toks[1] == "route":
        if len(toks) != 5:
            raise ValueError("bad static route")
        nh = toks[4]
        if nh.lower() == "null0":
            nh = "Null0"
        elif not _valid_ip(nh):
            raise ValueError("bad next hop")
        dev.statics.append(StaticRoute(_prefix(toks[2], toks[3]), nh))
        return None
    if head == "ip" and toks[1] == "access-list" and toks[2] == "extended":
        if len(toks) != 4:
            raise ConfigParseError(dev.hostname, f"line {lineno}: malformed access-list header")
        return ("acl", dev.acls.setdefault(toks[3], []))
    raise ValueError("unknown top-level line")


def _acl_term(toks: list[str]) -> tuple[str, list[str]]:
    if toks[0] == "any":
        return "any", toks[1:]
    if toks[0] == "host":
        ipaddress.IPv4Address(toks[1])
        return f"host {toks[1]}", toks[2:]
    ipaddress.IPv4Address(toks[0])
    ipaddress.IPv4Address(toks[1])
    return f"{toks[0]} {toks[1]}", toks[2:]


def _sub_line(dev: DeviceModel, stanza: tuple, toks: list[str]) -> bool:
    kind = stanza[0]
    if kind == "interface":
        iface: Interface = stanza[1]
        if toks[0] == "description":
            iface.description = " ".join(toks[1:])
        elif toks[:2] == ["ip", "address"] and len(toks) == 4:
            ipaddress.IPv4Address(toks[2])
            iface.ip, iface.mask_len = toks[2], mask_to_len(toks[3])
        elif toks[:2] == ["ip", "ospf"] and len(toks) == 5 and toks[3] == "area":
            iface.ospf_area = int(toks[4])
        elif toks[:3] == ["ip", "ospf", "cost"] and len(toks) == 4:
            iface.ospf_cost = int(toks[3])
        elif toks == ["ip", "router", "isis"]:
            iface.isis = True
        elif toks[:2] == ["ip", "access-group"] and len(toks) == 4 and toks[3] in ("in", "out"):
            if toks[3] == "in":
                iface.acl_in = toks[2]
            else:
                iface.acl_out = toks[2]
        else:
            return False
        return True
    if kind == "ospf":
        if toks[0] == "router-id" and len(toks) == 2:
            ipaddress.IPv4Address(toks[1])
            dev.ospf.router_id = toks[1]
        elif toks[:2] == ["redistribute", "bgp"]:
            dev.ospf.redistribute_bgp = int(toks[2])
            rest = toks[3:]
            if rest and rest[0] == "subnets":
                rest = rest[1:]
            if rest[:1] == ["metric"]:
                dev.ospf.redistribute_metric = int(rest[1])
                rest = rest[2:]
            if rest:
                return False
        else:
            return False
        return True
    if kind == "isis":
        if toks[0] == "net" and len(toks) == 2:
            dev.isis.net = toks[1]
        elif toks[0] == "is-type" and len(toks) == 2 and toks[1] in ISIS_LEVELS:
            dev.isis.is_type = toks[1]
        else:
            return False
        return True
    if kind == "bgp":
        bgp = dev.bgp
        if toks[:2] == ["bgp", "router-id"] and len(toks) == 3:
            ipaddress.IPv4Address(toks[2])
            bgp.router_id = toks[2]
        elif toks[:2] == ["bgp", "cluster-id"] and len(toks) == 3:
            ipaddress.IPv4Address(toks[2])
            bgp.cluster_id = toks[2]
        elif toks[0] == "network" and len(toks) == 4 and toks[2] == "mask":
            bgp.networks.append(_prefix(toks[1], toks[3]))
        elif toks[0] == "neighbor" and len(toks) >= 3:
            addr = toks[1]
            ipaddress.IPv4Address(addr)
            nbr = bgp.neighbor(addr)
            if nbr is None:
                nbr = Neighbor(addr)
                bgp.neighbors.append(nbr)
            rest = toks[2:]
            if rest[0] == "remote-as" and len(rest) == 2:
                nbr.remote_as = int(rest[1])
            elif rest[0] == "description":
                nbr.description = " ".join(rest[1:])
            elif rest[0] == "update-source" and len(rest) == 2:
                nbr.update_source = rest[1]
            elif rest == ["route-reflector-client"]:
                nbr.rr_client = True
            elif rest == ["next-hop-self"]:
                nbr.next_hop_self = True
            elif rest == ["shutdown"]:
                nbr.shutdown = True
            elif rest[0] == "route-map" and len(rest) == 3 and rest[2] in ("in", "out"):
                if rest[2] == "in":
                    nbr.route_map_in = rest[1]
                else:
                    nbr.route_map_out = rest[1]
            else:
                return False
        else:
            return False
        return True
    if kind == "route-map":
        clause: RouteMapClause = stanza[1]
        if toks[:4] == ["match", "ip", "address", "prefix-list"] and len(toks) == 5:
            clause.match_prefix_list = toks[4]
        elif toks[:2] == ["set", "local-preference"] and len(toks) == 3:
            clause.set_local_pref = int(toks[2])
        elif toks[:3] == ["set", "ip", "next-hop"] and len(toks) == 4:
            ipaddress.IPv4Address(toks[3])
            clause.set_next_hop = toks[3]
        else:
            return False
        return True
    if kind == "acl":
        rules: list[AclRule] = stanza[1]
        if toks[0] not in ("permit", "deny") or toks[1] != "ip":
            return False
        src, rest = _acl_term(toks[2:])
        dst, rest = _acl_term(rest)
        if rest:
            return False
        rules.append(AclRule(toks[0], src, dst))
        return True
    return False


def _check_references(dev: DeviceModel) -> None:
    for iface in dev.interfaces:
        for acl in (iface.acl_in, iface.acl_out):
            if acl and acl not in dev.acls:
                dev.dangling.append(f"interface {iface.name} access-group {acl}")
        if iface.ospf_area is not None and dev.ospf is None:
            dev.dangling.append(f"interface {iface.name} ospf area without ospf process")
        if iface.isis and dev.isis is None:
            dev.dangling.append(f"interface {iface.name} isis without isis process")
    if dev.bgp:
        for n in dev.bgp.neighbors:
            for rm in (n.route_map_in, n.route_map_out):
                if rm and rm not in dev.route_maps:
                    dev.dangling.append(f"neighbor {n.address} route-map {rm}")
    for name, clauses in dev.route_maps.items():
        for c in clauses:
            if c.match_prefix_list and c.match_prefix_list not in dev.prefix_lists:
                dev.dangling.append(f"route-map {name} {c.seq} prefix-list {c.match_prefix_list}")


def parse_configs(configs: dict[str, str]) -> dict[str, DeviceModel]:
    """Parse a whole config set; raises on the first structurally corrupt file."""
    return {router: parse_config(text, router) for router, text in sorted(configs.items())}


def parse_configs_lenient(configs: dict[str, str]) -> tuple[dict[str, DeviceModel], dict[str, str]]:
    """Parse a config set, replacing corrupt files by an empty device.

    Returns the models and a map of router -> parse error message.
    """
    models: dict[str, DeviceModel] = {}
    errors: dict[str, str] = {}
    for router, text in sorted(configs.items()):
        try:
            models[router] = parse_config(text, router)
        except ConfigParseError as exc:
            errors[router] = exc.reason
            models[router] = DeviceModel(hostname=router)
    return models, errors
