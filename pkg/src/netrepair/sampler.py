"""Pairwise-covering fault-set selection and tier-stratified scenario descriptors."""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence

from netrepair.topo import Tier

MIN_SET_SIZE = 2
MAX_SET_SIZE = 8

Pair = frozenset
Feasible = Callable[[str, str], bool]


class SamplerError(ValueError):
    pass


def _all_feasible(a: str, b: str) -> bool:
    return True


def feasible_pairs(kinds: Sequence[str], feasible: Feasible = _all_feasible) -> set[Pair]:
    return {frozenset((a, b)) for a, b in itertools.combinations(kinds, 2) if feasible(a, b)}


@dataclass(frozen=True)
class FaultSetCollection:
    kinds: tuple[str, ...]
    sets: tuple[tuple[str, ...], ...]
    seed: int

    @property
    def multi_sets(self) -> tuple[tuple[str, ...], ...]:
        return tuple(s for s in self.sets if len(s) > 1)

    @property
    def monosets(self) -> tuple[tuple[str, ...], ...]:
        return tuple(s for s in self.sets if len(s) == 1)

    @property
    def covered_pairs(self) -> set[Pair]:
        return {frozenset(p) for s in self.sets for p in itertools.combinations(s, 2) if p[0] != p[1]}

    def to_dict(self) -> dict:
        return {"kinds": list(self.kinds), "sets": [list(s) for s in self.sets], "seed": self.seed}

    @classmethod
    def from_dict(cls, d: dict) -> "FaultSetCollection":
        return cls(tuple(d["kinds"]), tuple(tuple(s) for s in d["sets"]), int(d["seed"]))


def coverage(collection: FaultSetCollection, feasible: Feasible = _all_feasible) -> float:
    universe = feasible_pairs(collection.kinds, feasible)
    if not universe:
        return 1.0
    return len(universe & collection.covered_pairs) / len(universe)


def pairwise_greedy(
    kinds: Sequence[str],
    feasible: Feasible = _all_feasible,
    seed: int = 0,
    k_choices: Iterable[int] | None = None,
    with_monosets: bool = True,
) -> FaultSetCollection:
    """Greedy covering of all feasible kind pairs.

    Each round draws a size k, then grows the set one kind at a time, taking
    the kind that covers the most still-uncovered pairs against the partial
    set. Ties go to the kind with more uncovered pairs overall, then to the
    earlier kind in ``kinds``. Kinds that add nothing are not padded in, so a
    set may end up smaller than its drawn k (never below 2). One singleton set
    per kind is appended at the end.
    """
    kinds = list(dict.fromkeys(kinds))
    if len(kinds) < 2:
        raise SamplerError("need at least two fault kinds")
    universe = feasible_pairs(kinds, feasible)
    partnered = {k for p in universe for k in p}
    lonely = [k for k in kinds if k not in partnered]
    if lonely:
        raise SamplerError(f"infeasible: {', '.join(lonely)} cannot share a set with any other kind")
    sizes = list(k_choices) if k_choices is not None else list(range(MIN_SET_SIZE, MAX_SET_SIZE + 1))
    if not sizes or min(sizes) < MIN_SET_SIZE:
        raise SamplerError("set sizes must be at least 2")
    rng = random.Random(seed)
    order = {k: i for i, k in enumerate(kinds)}
    uncovered = set(universe)
    sets: list[tuple[str, ...]] = []
    while uncovered:
        k = rng.choice(sizes)
        degree = {x: 0 for x in kinds}
        for p in uncovered:
            for x in p:
                degree[x] += 1
        chosen: list[str] = []
        while len(chosen) < k:
            best = None
            for x in kinds:
                if x in chosen or not all(frozenset((x, y)) in universe for y in chosen):
                    continue
                gain = sum(1 for y in chosen if frozenset((x, y)) in uncovered)
                if chosen and gain == 0:
                    continue
                if not chosen and degree[x] == 0:
                    continue
                score = (gain, degree[x], -order[x])
                if best is None or score > best[0]:
                    best = (score, x)
            if best is None:
                break
            chosen.append(best[1])
        if len(chosen) < MIN_SET_SIZE:
            # cannot happen while an uncovered pair remains; guard against a looping draw
            raise SamplerError("greedy round produced no new pairs")
        for a, b in itertools.combinations(chosen, 2):
            uncovered.discard(frozenset((a, b)))
        sets.append(tuple(sorted(chosen, key=order.__getitem__)))
    if with_monosets:
        sets.extend((k,) for k in kinds)
    return FaultSetCollection(tuple(kinds), tuple(sets), seed)


@dataclass(frozen=True)
class ScenarioDescriptor:
    fault_set: tuple[str, ...]
    topology: str
    tier: Tier
    seed: int
    index: int = 0
    extra: dict = field(default_factory=dict, compare=False)

    @property
    def scenario_id(self) -> str:
        return f"s{self.index:04d}-{self.tier.value}-{self.topology}"

    def to_dict(self) -> dict:
        return {
            "id": self.scenario_id,
            "fault_set": list(self.fault_set),
            "topology": self.topology,
            "tier": self.tier.value,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ScenarioDescriptor":
        idx = int(d["id"][1:5]) if "id" in d else 0
        return cls(tuple(d["fault_set"]), d["topology"], Tier(d["tier"]), int(d["seed"]), idx)


def stratified_instantiate(
    collection: FaultSetCollection,
    pools: Mapping[Tier, Sequence[str]],
    seed: int = 0,
) -> list[ScenarioDescriptor]:
    """One descriptor per (fault set, tier): a uniformly drawn topology from each tier's pool."""
    for tier in Tier:
        if not pools.get(tier):
            raise SamplerError(f"empty topology pool for tier {tier.value}")
    rng = random.Random(seed)
    sorted_pools = {tier: sorted(pools[tier]) for tier in Tier}
    out = []
    for fs in collection.sets:
        for tier in Tier:
            name = rng.choice(sorted_pools[tier])
            out.append(ScenarioDescriptor(tuple(fs), name, tier, rng.randrange(2**31), len(out)))
    return out
