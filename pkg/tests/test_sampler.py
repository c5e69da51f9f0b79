import itertools
import time
import zlib

import pytest
from hypothesis import given
from hypothesis import strategies as st

from netrepair.faults import KINDS, kind_pair_feasible
from netrepair.sampler import (
    MAX_SET_SIZE,
    FaultSetCollection,
    SamplerError,
    ScenarioDescriptor,
    coverage,
    feasible_pairs,
    pairwise_greedy,
    stratified_instantiate,
)
from netrepair.topo import Tier

POOLS = {Tier.SMALL: ["s1", "s2"], Tier.MEDIUM: ["m1"], Tier.LARGE: ["l1", "l2", "l3"]}


def _greedy_bound(n, k):
    # exhaustive oracle: fewest k-sets covering all pairs of n kinds (tiny n only)
    pairs = set(itertools.combinations(range(n), 2))
    blocks = [set(itertools.combinations(c, 2)) for c in itertools.combinations(range(n), k)]
    for m in range(1, len(pairs) + 1):
        for pick in itertools.combinations(blocks, m):
            if set().union(*pick) == pairs:
                return m
    return None


def test_four_kinds_k3():
    col = pairwise_greedy("abcd", seed=0, k_choices=[3], with_monosets=False)
    assert col.sets[0] == ("a", "b", "c")
    assert "d" in col.sets[1] and len(col.sets[1]) == 3
    assert coverage(col) == 1.0
    assert len(col.sets) <= 3
    assert _greedy_bound(4, 3) == 3


def test_two_kinds():
    col = pairwise_greedy(["a", "b"], seed=4)
    assert col.multi_sets == (("a", "b"),)
    assert coverage(col) == 1.0


def test_coverage_examples():
    assert coverage(FaultSetCollection(("a", "b", "c"), (("a", "b"),), 0)) == pytest.approx(1 / 3)
    assert coverage(FaultSetCollection(("a", "b", "c"), (), 0)) == 0.0
    assert coverage(FaultSetCollection(("a",), (), 0)) == 1.0


def test_too_few_kinds():
    with pytest.raises(SamplerError):
        pairwise_greedy(["a"])


def test_infeasible_kind():
    with pytest.raises(SamplerError, match="infeasible"):
        pairwise_greedy("abc", feasible=lambda x, y: "c" not in (x, y))


def test_catalog_coverage_within_budget():
    t0 = time.perf_counter()
    col = pairwise_greedy(list(KINDS), kind_pair_feasible, seed=0)
    assert time.perf_counter() - t0 < 1.0
    assert coverage(col, kind_pair_feasible) == 1.0
    assert len(col.multi_sets) <= 60
    assert len(col.monosets) == len(KINDS)


def test_serialization():
    col = pairwise_greedy("abcde", seed=2)
    assert FaultSetCollection.from_dict(col.to_dict()) == col
    d = stratified_instantiate(col, POOLS, 1)[5]
    assert ScenarioDescriptor.from_dict(d.to_dict()) == d


def test_stratified_counts():
    col = FaultSetCollection(tuple("ab"), (("a", "b"),), 0)
    out = stratified_instantiate(col, {t: ["x"] for t in Tier}, 0)
    assert [d.tier for d in out] == list(Tier)
    assert len(out) == 3


def test_dataset_arithmetic():
    kinds = [f"k{i}" for i in range(27)]
    multi = tuple(tuple(kinds[(i + j) % 27] for j in range(3)) for i in range(50))
    col = FaultSetCollection(tuple(kinds), multi + tuple((k,) for k in kinds), 0)
    assert len(stratified_instantiate(col, POOLS, 9)) == 231


def test_stratified_deterministic_and_in_pool():
    col = pairwise_greedy(list(KINDS), seed=3)
    a, b = stratified_instantiate(col, POOLS, 5), stratified_instantiate(col, POOLS, 5)
    assert a == b
    assert all(d.topology in POOLS[d.tier] for d in a)
    assert len({d.scenario_id for d in a}) == len(a)


def test_empty_pool():
    col = pairwise_greedy("ab")
    with pytest.raises(SamplerError, match="large"):
        stratified_instantiate(col, {Tier.SMALL: ["a"], Tier.MEDIUM: ["b"], Tier.LARGE: []})


kind_lists = st.lists(st.text("abcdefghijklmnopqrstuvwxyz", min_size=1, max_size=3), min_size=2, max_size=16, unique=True)


@given(kind_lists, st.integers(0, 2**32), st.integers(0, 2**32))
def test_greedy_properties(kinds, seed, fseed):
    # a random symmetric feasibility relation in which every kind keeps at least one partner
    def feasible(x, y):
        if {x, y} & {kinds[0]}:
            return True
        return zlib.crc32(f"{min(x, y)}|{max(x, y)}|{fseed}".encode()) % 3 != 0

    col = pairwise_greedy(kinds, feasible, seed)
    universe = feasible_pairs(kinds, feasible)
    covered = set()
    for s in col.multi_sets:
        assert 2 <= len(s) <= MAX_SET_SIZE
        assert len(set(s)) == len(s)
        new = {frozenset(p) for p in itertools.combinations(s, 2)}
        assert new <= universe
        assert new - covered
        covered |= new
    assert covered == universe
    assert coverage(col, feasible) == 1.0
    assert col.monosets == tuple((k,) for k in kinds)
    assert pairwise_greedy(kinds, feasible, seed) == col
