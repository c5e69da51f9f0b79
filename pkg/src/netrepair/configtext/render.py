"""Render device models to IOS-style configuration text.

Stanza order is fixed: hostname, interfaces, IGP processes, BGP, prefix-lists,
route-maps, static routes, access-lists.
"""

from __future__ import annotations

import ipaddress

from netrepair.configtext.model import DeviceModel, len_to_mask


def _net_mask(prefix: str) -> tuple[str, str]:
    net = ipaddress.IPv4Network(prefix, strict=False)
    return str(net.network_address), str(net.netmask)


def render_device(dev: DeviceModel) -> str:
    out: list[str] = [f"hostname {dev.hostname}", "!"]
    for iface in dev.interfaces:
        out.append(f"interface {iface.name}")
        if iface.description:
            out.append(f" description {iface.description}")
        if iface.ip is not None:
            out.append(f" ip address {iface.ip} {len_to_mask(iface.mask_len)}")
        if iface.ospf_area is not None:
            pid = dev.ospf.pid if dev.ospf else 1
            out.append(f" ip ospf {pid} area {iface.ospf_area}")
        if iface.ospf_cost is not None:
            out.append(f" ip ospf cost {iface.ospf_cost}")
        if iface.isis:
            out.append(" ip router isis")
        if iface.acl_in:
            out.append(f" ip access-group {iface.acl_in} in")
        if iface.acl_out:
            out.append(f" ip access-group {iface.acl_out} out")
        out.append("!")
    if dev.ospf is not None:
        out.append(f"router ospf {dev.ospf.pid}")
        if dev.ospf.router_id:
            out.append(f" router-id {dev.ospf.router_id}")
        if dev.ospf.redistribute_bgp is not None:
            out.append(
                f" redistribute bgp {dev.ospf.redistribute_bgp} subnets"
                f" metric {dev.ospf.redistribute_metric}"
            )
        out.append("!")
    if dev.isis is not None:
        out += ["router isis", f" net {dev.isis.net}", f" is-type {dev.isis.is_type}", "!"]
    if dev.bgp is not None:
        bgp = dev.bgp
        out.append(f"router bgp {bgp.asn}")
        if bgp.router_id:
            out.append(f" bgp router-id {bgp.router_id}")
        if bgp.cluster_id:
            out.append(f" bgp cluster-id {bgp.cluster_id}")
        for prefix in bgp.networks:
            net, mask = _net_mask(prefix)
            out.append(f" network {net} mask {mask}")
        for n in bgp.neighbors:
            head = f" neighbor {n.address}"
            if n.remote_as is not None:
                out.append(f"{head} remote-as {n.remote_as}")
            if n.description:
                out.append(f"{head} description {n.description}")
            if n.update_source:
                out.append(f"{head} update-source {n.update_source}")
            if n.rr_client:
                out.append(f"{head} route-reflector-client")
            if n.next_hop_self:
                out.append(f"{head} next-hop-self")
            if n.route_map_in:
                out.append(f"{head} route-map {n.route_map_in} in")
            if n.route_map_out:
                out.append(f"{head} route-map {n.route_map_out} out")
            if n.shutdown:
                out.append(f"{head} shutdown")
        out.append("!")
    for name, entries in dev.prefix_lists.items():
        for e in entries:
            line = f"ip prefix-list {name} seq {e.seq} {e.action} {e.prefix}"
            if e.ge is not None:
                line += f" ge {e.ge}"
            if e.le is not None:
                line += f" le {e.le}"
            out.append(line)
        out.append("!")
    for name, clauses in dev.route_maps.items():
        for c in clauses:
            out.append(f"route-map {name} {c.action} {c.seq}")
            if c.match_prefix_list:
                out.append(f" match ip address prefix-list {c.match_prefix_list}")
            if c.set_local_pref is not None:
                out.append(f" set local-preference {c.set_local_pref}")
            if c.set_next_hop:
                out.append(f" set ip next-hop {c.set_next_hop}")
            out.append("!")
    if dev.statics:
        for s in dev.statics:
            net, mask = _net_mask(s.prefix)
            out.append(f"ip route {net} {mask} {s.next_hop}")
        out.append("!")
    for name, rules in dev.acls.items():
        out.append(f"ip access-list extended {name}")
        for r in rules:
            out.append(f" {r.action} ip {r.src} {r.dst}")
        out.append("!")
    out.append("end")
    return "\n".join(out) + "\n"


def render_devices(devices: dict[str, DeviceModel]) -> dict[str, str]:
    return {name: render_device(devices[name]) for name in sorted(devices)}
