import random

import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

import fig3
from conftest import make_topology
from netrepair.configtext import parse_configs, render_devices
from netrepair.faults import applicable_targets, inject
from netrepair.plan import PlanError, build_plan
from netrepair.simulator import (
    ACCEPT,
    DROP,
    FORWARD,
    DivergenceError,
    ForwardingTable,
    compute_dataplane,
    reachable_transport,
)
from strategies import features, topologies


def rows(table, prefix):
    out = []
    for r in table.routers:
        a = table.action(r, prefix)
        if a.kind == FORWARD:
            out += [(r, prefix, f"Fwd {s}") for s in sorted(a.next_routers)]
        else:
            out.append((r, prefix, "Drop" if a.kind == DROP else "Accept"))
    return out


def test_fig3_table_rows():
    table = compute_dataplane(fig3.models(), fig3.topology())
    assert rows(table, fig3.PREFIX) == [
        ("R1", fig3.PREFIX, "Fwd R2"),
        ("R1", fig3.PREFIX, "Fwd R3"),
        ("R2", fig3.PREFIX, "Fwd R4"),
        ("R3", fig3.PREFIX, "Drop"),
        ("R4", fig3.PREFIX, "Accept"),
    ]


def _ospf_triangle():
    t = make_topology("tri", [("a", "b"), ("b", "c"), ("a", "c")])
    plan = build_plan(t, set(), 0)
    for dev in plan.devices.values():
        for i in dev.interfaces:
            if i.ospf_cost is not None:
                i.ospf_cost = 1
    return t, plan


def test_triangle_shortest_path():
    t, plan = _ospf_triangle()
    table = compute_dataplane(plan.devices, t)
    lan_c = plan.lans["c"]
    assert table.action("a", lan_c).next_routers == frozenset({"c"})
    assert table.action("c", lan_c).kind == ACCEPT


def test_remote_as_mismatch_exchanges_nothing(abilene):
    plan = build_plan(abilene, {"ebgp"}, 1)
    fault = applicable_targets(plan, "bgp-wrong-remote-as")[0]
    broken, _ = inject(plan, [fault])
    a, b = fault.binding["router"], None
    good = compute_dataplane(plan.devices, abilene)
    bad = compute_dataplane(broken.devices, abilene, good.universe)
    pair = {(s.a, s.b) for s in good.sessions} - {(s.a, s.b) for s in bad.sessions}
    assert len(pair) == 1
    (x, y), = pair
    assert a in (x, y)
    assert not any({s.a, s.b} == {x, y} for s in bad.sessions)


def _path4():
    return make_topology("path", [("a", "b"), ("b", "c"), ("c", "d")])


def test_transport_loopback_reachable():
    t = _path4()
    plan = build_plan(t, set(), 0)
    assert reachable_transport(plan.devices, t, "a", plan.loopbacks["d"])


def test_transport_lost_after_adjacency_fault():
    t = _path4()
    plan = build_plan(t, set(), 0)
    fault = next(f for f in applicable_targets(plan, "ospf-disable-adjacency")
                 if f.binding["router"] == "b" and f.binding["interface"] == "Ethernet2")
    broken, _ = inject(plan, [fault])
    assert not reachable_transport(broken.devices, t, "a", plan.loopbacks["d"])


def test_transport_connected_address():
    t = _path4()
    plan = build_plan(t, set(), 0)
    peer_ip = plan.devices["b"].interface("Ethernet1").ip
    assert reachable_transport(plan.devices, t, "a", peer_ip)


def test_forwarding_table_json_round_trip(rich_plan, abilene):
    table = compute_dataplane(rich_plan.devices, abilene)
    again = ForwardingTable.from_dict(table.to_dict())
    assert again.entries == table.entries
    assert again.hop_acls == table.hop_acls


def _golden_violations(plan, table):
    """Drops that golden intent forbids: any LAN, or a loopback inside its own AS."""
    lan_set = set(plan.lans.values())
    owner_of = {f"{ip}/32": r for r, ip in plan.loopbacks.items()}
    bad = []
    for p in table.universe:
        for r in table.routers:
            if table.action(r, p).kind != DROP:
                continue
            if p in lan_set or plan.router_asn[owner_of[p]] == plan.router_asn[r]:
                bad.append((r, p))
    return bad


@given(topologies(max_nodes=16), features, st.integers(0, 10_000))
def test_golden_soundness_and_order_independence(t, feats, seed):
    try:
        plan = build_plan(t, feats, seed)
    except PlanError:
        assume(False)
    models = parse_configs(render_devices(plan.devices))
    fwd = compute_dataplane(models, t)
    assert _golden_violations(plan, fwd) == []
    for p in fwd.universe:
        assert fwd.owners(p), p
    rev = compute_dataplane(models, t, order="reverse")
    assert rev.entries == fwd.entries
    assert compute_dataplane(models, t).entries == fwd.entries


def test_order_independence_on_bundled(bundled):
    for name in ("abilene", "metro20", "regional56"):
        t = bundled[name]
        plan = build_plan(t, {"route-reflection", "local-pref-policy", "isis", "redistribution-bgp-ospf"}, 4)
        assert compute_dataplane(plan.devices, t).entries == compute_dataplane(plan.devices, t, order="reverse").entries


@given(topologies(max_nodes=10), st.integers(0, 1000), st.data())
def test_withdrawing_a_network_only_moves_that_prefix(t, seed, data):
    try:
        plan = build_plan(t, {"ebgp"}, seed)
    except PlanError:
        assume(False)
    cands = applicable_targets(plan, "bgp-withdraw-network")
    assume(cands)
    fault = data.draw(st.sampled_from(cands))
    broken, _ = inject(plan, [fault])
    good = compute_dataplane(plan.devices, t)
    bad = compute_dataplane(broken.devices, t, good.universe)
    moved = {p for (r, p), a in good.entries.items() if bad.entries[(r, p)] != a}
    assert moved <= {fault.binding["prefix"]}


def test_divergence_budget_is_enforced(abilene):
    # an empty universe shrinks the budget to 2 x routers steps, too few for this plan
    plan = build_plan(abilene, {"route-reflection"}, 0)
    with pytest.raises(DivergenceError, match="22 iterations"):
        compute_dataplane(plan.devices, abilene, universe=[])
