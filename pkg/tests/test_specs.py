import random
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

import fig3
from oracles import SINK as ORACLE_SINK
from oracles import brute_force_predicates, dfs_max_flow, simple_paths
from netrepair.configtext import parse_configs
from netrepair.simulator import ACTION_ACCEPT, ACTION_DROP, FORWARD, Action, ForwardingTable, compute_dataplane
from netrepair.specs import (
    SINK,
    MiningOptions,
    Predicate,
    PredicateSet,
    ScoreError,
    diff_violations,
    forwarding_graph,
    mine_predicates,
    mine_prefix,
    score,
    score_sets,
)

P = fig3.PREFIX


def fig3_table():
    return compute_dataplane(fig3.models(), fig3.topology())


def table_from(actions: dict, prefix: str = "10.9.0.0/24", hop_acls=None) -> ForwardingTable:
    entries = {}
    for r, a in actions.items():
        if a == "drop":
            entries[(r, prefix)] = ACTION_DROP
        elif a == "accept":
            entries[(r, prefix)] = ACTION_ACCEPT
        else:
            entries[(r, prefix)] = Action(FORWARD, frozenset(a))
    routers = sorted(actions)
    return ForwardingTable(entries, [prefix], routers, {r: None for r in routers}, hop_acls or {})


def test_fig3_graph():
    succ = forwarding_graph(fig3_table(), P)
    assert succ == {"R1": {"R2", "R3"}, "R2": {"R4"}, "R3": set(), "R4": {SINK}, SINK: set()}


def test_fig3_predicates():
    got = {str(p) for p in mine_predicates(fig3_table())} 
    want = {
        "Reachability(R1,10.1.0.0/24)",
        "Reachability(R2,10.1.0.0/24)",
        "Isolation(R3,10.1.0.0/24)",
        "Reachability(R4,10.1.0.0/24)",
        "Waypoint(R1,10.1.0.0/24,R2)",
        "Waypoint(R1,10.1.0.0/24,R4)",
        "Waypoint(R2,10.1.0.0/24,R4)",
    }
    assert {g for g in got if "10.1.0.0/24" in g} == want


def test_fig3_parity_switch():
    opts = MiningOptions(suppress_owner_waypoints=True)
    got = {str(p) for p in mine_prefix(fig3_table(), P, opts) if p.kind == "Waypoint"}
    assert got == {"Waypoint(R1,10.1.0.0/24,R2)"}


def test_single_owner_graph():
    t = table_from({"a": "accept"})
    assert forwarding_graph(t, "10.9.0.0/24") == {"a": {SINK}, SINK: set()}


def test_out_acl_removes_edge():
    from netrepair.configtext.model import AclRule

    t = table_from({"a": {"b"}, "b": "accept"}, hop_acls={("a", "b"): ([AclRule("deny", "any", "any")], None)})
    assert forwarding_graph(t, "10.9.0.0/24")["a"] == set()


def test_path_graph_waypoint_no_lb():
    t = table_from({"a": {"b"}, "b": "accept"})
    preds = {str(p) for p in mine_prefix(t, "10.9.0.0/24")}
    assert "Waypoint(a,10.9.0.0/24,b)" in preds
    assert not any(p.startswith("LoadBalancing") for p in preds)


def test_diamond():
    t = table_from({"a": {"b", "c"}, "b": {"d"}, "c": {"d"}, "d": "accept"})
    preds = {str(p) for p in mine_prefix(t, "10.9.0.0/24") if p.router == "a"}
    assert "LoadBalancing(a,10.9.0.0/24,2)" in preds
    assert "Waypoint(a,10.9.0.0/24,d)" in preds
    assert "Waypoint(a,10.9.0.0/24,b)" not in preds and "Waypoint(a,10.9.0.0/24,c)" not in preds
    succ = {"a": {"b", "c"}, "b": {"d"}, "c": {"d"}, "d": {ORACLE_SINK}}
    assert len(simple_paths(succ, "a")) == 2 and dfs_max_flow(succ, "a") == 2


def random_actions(seed: int) -> dict:
    rng = random.Random(seed)
    n = rng.randint(1, 8)
    nodes = [f"n{i}" for i in range(n)]
    acts = {}
    for x in nodes:
        roll = rng.random()
        if roll < 0.2:
            acts[x] = "accept"
        elif roll < 0.3:
            acts[x] = "drop"
        else:
            outs = {y for y in nodes if y != x and rng.random() < 0.4}
            acts[x] = outs or "drop"
    return acts


def _as_triples(preds):
    out = set()
    for p in preds:
        extra = p.waypoint if p.kind == "Waypoint" else p.paths if p.kind == "LoadBalancing" else None
        out.add((p.kind, p.router, extra))
    return out


@pytest.mark.parametrize("seed", range(100))
def test_mining_matches_brute_force_oracle(seed):
    acts = random_actions(seed)
    table = table_from(acts)
    succ = {r: (set(a) if isinstance(a, set) else {ORACLE_SINK} if a == "accept" else set()) for r, a in acts.items()}
    want = brute_force_predicates(succ, sorted(acts), "10.9.0.0/24")
    assert _as_triples(mine_prefix(table, "10.9.0.0/24")) == want


def test_diff_identity_is_empty():
    t = fig3_table()
    g = mine_predicates(t)
    assert len(diff_violations(g, t)) == 0
    assert len(diff_violations(g, t, t)) == 0


def test_diff_when_r2_drops():
    t = fig3_table()
    g = mine_predicates(t)
    bad = fig3_table()
    bad.entries[("R2", P)] = ACTION_DROP
    v = {str(p) for p in diff_violations(g, bad)}
    assert {"Reachability(R1,10.1.0.0/24)", "Reachability(R2,10.1.0.0/24)", "Waypoint(R1,10.1.0.0/24,R2)"} <= v
    assert v == {str(p) for p in diff_violations(g, bad, t)}


def _synthetic(nf, nu, nr):
    mk = lambda tag, i: Predicate("Reachability", f"{tag}{i}", "10.0.0.0/24")
    fixed = {mk("f", i) for i in range(nf)}
    unfixed = {mk("u", i) for i in range(nu)}
    regressed = {mk("r", i) for i in range(nr)}
    keep = {mk("k", 0)}
    golden = PredicateSet(fixed | unfixed | regressed | keep)
    v = golden.derive(fixed | unfixed, "violations")
    return golden, v, golden.derive(unfixed | regressed, "fix")


def test_score_example():
    rep = score_sets(*_synthetic(6, 2, 2))
    assert rep.fix_score == pytest.approx(0.6) and rep.regression_rate == pytest.approx(0.2)
    assert not rep.strictly_correct


@pytest.mark.parametrize("nf", range(11))
def test_score_formulas_exact(nf):
    for nu in range(11):
        for nr in range(11):
            if nf == nu == nr == 0:
                continue
            rep = score_sets(*_synthetic(nf, nu, nr))
            d = nf + nu + nr
            assert Fraction(rep.fix_score).limit_denominator(1000) == Fraction(nf, d)
            assert Fraction(rep.regression_rate).limit_denominator(1000) == Fraction(nr, d)
            assert rep.fix_score == nf / d and rep.regression_rate == nr / d


def test_identity_fix_and_null_fix():
    t = fig3_table()
    g = mine_predicates(t)
    bad = fig3_table()
    bad.entries[("R2", P)] = ACTION_DROP
    v = diff_violations(g, bad)
    good = score(g, v, t)
    assert (good.fix_score, good.regression_rate, good.strictly_correct) == (1.0, 0.0, True)
    assert score(g, v, bad).fix_score == 0.0


def test_v_must_be_subset():
    g = PredicateSet({Predicate("Reachability", "a", "10.0.0.0/24")})
    with pytest.raises(ScoreError):
        score_sets(g, g.derive({Predicate("Isolation", "b", "10.0.0.0/24")}, "v"), g.derive(set(), "f"))


def test_predicate_validation():
    with pytest.raises(ValueError):
        Predicate("Waypoint", "a", "10.0.0.0/24", waypoint="a")
    with pytest.raises(ValueError):
        Predicate("LoadBalancing", "a", "10.0.0.0/24", paths=1)


def test_predicate_set_serialization_round_trip():
    g = mine_predicates(fig3_table())
    assert PredicateSet.from_dict(g.to_dict()).predicates == g.predicates


counts = st.integers(0, 30)


@given(counts, counts, counts)
def test_score_bounds(nf, nu, nr):
    rep = score_sets(*_synthetic(nf, nu, nr))
    assert 0 <= rep.fix_score + rep.regression_rate <= 1 + 1e-12
    if rep.strictly_correct:
        assert rep.fix_score == 1.0 and rep.regression_rate == 0.0
    assert rep.fixed.predicates | rep.unfixed.predicates == rep.violations.predicates
    assert not rep.fixed.predicates & rep.unfixed.predicates
