import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import gml, make_topology
from netrepair.topo import Tier, TopologyError, classify_tier, is_connected, load_topology


def test_triangle_document(triangle):
    assert len(triangle.routers) == 3
    assert len(triangle.links) == 3
    assert all(triangle.degree(r) == 2 for r in triangle.routers)


def test_self_loop_rejected():
    with pytest.raises(TopologyError, match="self-loop"):
        load_topology('graph [ node [ id 0 label "A" ] edge [ source 0 target 0 ] ]')


def test_disconnected_rejected():
    with pytest.raises(TopologyError, match="disconnected"):
        make_topology("two-pairs", [("a", "b"), ("c", "d")])


@pytest.mark.parametrize("n, tier", [(49, Tier.SMALL), (50, Tier.MEDIUM), (100, Tier.MEDIUM), (101, Tier.LARGE), (754, Tier.LARGE)])
def test_tiers(n, tier):
    assert classify_tier(n) is tier


def test_interface_ids_follow_sorted_neighbors(triangle):
    assert triangle.interfaces("a") == {1: ("b", 1), 2: ("c", 1)}
    assert triangle.peer_of("c", 2) == ("b", 2)


def test_native_round_trip(abilene):
    assert load_topology(abilene.to_dict()) == abilene


def test_abilene_shape(abilene):
    assert len(abilene.routers) == 11
    assert len(abilene.links) == 14


def test_bundled_tiers_cover_all(bundled):
    assert {classify_tier(t) for t in bundled.values()} == set(Tier)


@st.composite
def connected_edges(draw):
    n = draw(st.integers(2, 12))
    edges = set()
    for i in range(1, n):
        j = draw(st.integers(0, i - 1))
        edges.add((f"r{j}", f"r{i}"))
    extra = draw(st.lists(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)), max_size=10))
    for a, b in extra:
        if a != b:
            edges.add((f"r{min(a, b)}", f"r{max(a, b)}"))
    return sorted(edges)


@given(connected_edges())
def test_loading_is_deterministic_and_consistent(edges):
    text = gml(edges)
    t1, t2 = load_topology(text, "x"), load_topology(text.encode(), "x")
    assert t1 == t2
    assert is_connected(t1.routers, [(a, b) for a, _, b, _ in t1.links])
    for a, ia, b, ib in t1.links:
        assert t1.peer_of(a, ia) == (b, ib)
        assert t1.peer_of(b, ib) == (a, ia)
    for r in t1.routers:
        assert sorted(t1.interfaces(r)) == list(range(1, t1.degree(r) + 1))
