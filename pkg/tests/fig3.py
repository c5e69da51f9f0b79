"""Four-router example network: R1 load-shares to R2 and R3, R3 blackholes the prefix."""

from netrepair.configtext import parse_configs
from netrepair.topo import load_topology

PREFIX = "10.1.0.0/24"

TOPOLOGY = {
    "name": "fig3",
    "routers": ["R1", "R2", "R3", "R4"],
    "links": [["R1", 1, "R2", 1], ["R1", 2, "R3", 1], ["R2", 2, "R4", 1], ["R3", 2, "R4", 2]],
}

_LINKS = {
    ("R1", 1): "10.0.0.0", ("R2", 1): "10.0.0.1",
    ("R1", 2): "10.0.0.2", ("R3", 1): "10.0.0.3",
    ("R2", 2): "10.0.0.4", ("R4", 1): "10.0.0.5",
    ("R3", 2): "10.0.0.6", ("R4", 2): "10.0.0.7",
}


def _config(name: str, idx: int) -> str:
    lines = [f"hostname {name}", "!", "interface Loopback0",
             f" ip address 172.20.0.{idx} 255.255.255.255", " ip ospf 1 area 0", "!"]
    if name == "R4":
        lines += ["interface Loopback1", " ip address 10.1.0.1 255.255.255.0", " ip ospf 1 area 0", "!"]
    for (r, ifid), addr in sorted(_LINKS.items()):
        if r == name:
            lines += [f"interface Ethernet{ifid}", f" ip address {addr} 255.255.255.254",
                      " ip ospf 1 area 0", " ip ospf cost 10", "!"]
    lines += ["router ospf 1", f" router-id 172.20.0.{idx}", "!"]
    if name == "R3":
        lines += [f"ip route 10.1.0.0 255.255.255.0 Null0", "!"]
    lines.append("end")
    return "\n".join(lines) + "\n"


def configs() -> dict[str, str]:
    return {name: _config(name, i + 1) for i, name in enumerate(TOPOLOGY["routers"])}


def models():
    return parse_configs(configs())


def topology():
    return load_topology(TOPOLOGY)
