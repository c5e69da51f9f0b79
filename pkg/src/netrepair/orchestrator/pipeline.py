"""Dataset generation: sample fault sets, build and break networks, persist scenarios."""

from __future__ import annotations

import hashlib
import json
import os
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from netrepair.configtext import GRAMMAR_VERSION, parse_configs, render_devices
from netrepair.faults import (
    CATALOG,
    KINDS,
    FaultError,
    FaultInstance,
    GroundTruthDiff,
    apply_fault,
    applicable_targets,
    inject,
    kind_pair_feasible,
)
from netrepair.plan import FEATURES, PLAN_VERSION, PlanError, build_plan, resolve_dependencies
from netrepair.sampler import (
    FaultSetCollection,
    ScenarioDescriptor,
    SamplerError,
    feasible_pairs,
    pairwise_greedy,
    stratified_instantiate,
)
from netrepair.simulator import DivergenceError, ForwardingTable, compute_dataplane
from netrepair.specs import PredicateSet, diff_violations, mine_predicates
from netrepair.topo import Tier, Topology, classify_tier, load_directory, load_topology

CATALOG_VERSION = "catalog-1"
MAX_RESAMPLES = 5
MAX_EXTRA_FEATURES = 2
# features never added at random: they only matter when a fault asks for them
_OPTIONAL_EXTRAS = tuple(f for f in FEATURES if f not in ("network-statements",))


class GenerationError(RuntimeError):
    pass


def dump_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, sort_keys=True, indent=1) + "\n")


@dataclass
class Scenario:
    id: str
    descriptor: ScenarioDescriptor
    topology: Topology
    features: list[str]
    plan_seed: int
    golden: dict[str, str]
    broken: dict[str, str]
    diff: GroundTruthDiff
    spec: PredicateSet
    violations: PredicateSet
    golden_table: ForwardingTable
    metadata: dict = field(default_factory=dict)
    plan_json: str = ""

    @property
    def affected_routers(self) -> list[str]:
        return list(self.diff.affected_routers)


def _draw_features(kinds, rng: random.Random) -> frozenset[str]:
    feats = set()
    for k in kinds:
        feats |= set(KINDS[k].required_features)
    extras = rng.sample(_OPTIONAL_EXTRAS, rng.randint(0, MAX_EXTRA_FEATURES))
    # an extra IGP would split a small network into more ASes than the faults need
    feats |= {f for f in extras if f not in ("isis", "isis-multi-level") or feats & {"isis", "isis-multi-level"}}
    return resolve_dependencies(feats)


def _bind(plan, kinds, rng: random.Random) -> list[FaultInstance]:
    cur = plan.copy()
    used: set = set()
    out = []
    for k in kinds:
        cands = [f for f in applicable_targets(cur, k, rng) if f.target_key() not in used]
        if not cands:
            raise FaultError(f"no free binding for {k}")
        f = rng.choice(cands)
        apply_fault(cur, f)
        used.add(f.target_key())
        out.append(f)
    return out


def build_scenario(desc: ScenarioDescriptor, topology: Topology) -> Scenario:
    """Generate one scenario, resampling up to MAX_RESAMPLES times.

    Raises:
        GenerationError: listing the reason of every attempt.
    """
    reasons = []
    for attempt in range(MAX_RESAMPLES + 1):
        rng = random.Random(f"{desc.seed}:{attempt}")
        feats = _draw_features(desc.fault_set, rng)
        plan_seed = rng.randrange(2**31)
        try:
            plan = build_plan(topology, feats, plan_seed)
            faults = _bind(plan, desc.fault_set, rng)
            broken_plan, diff = inject(plan, faults, plan_seed)
        except (PlanError, FaultError) as exc:
            reasons.append(f"attempt {attempt}: {exc}")
            continue
        golden = render_devices(plan.devices)
        broken = render_devices(broken_plan.devices)
        try:
            gtable = compute_dataplane(parse_configs(golden), topology)
            btable = compute_dataplane(parse_configs(broken), topology, gtable.universe)
        except DivergenceError as exc:
            reasons.append(f"attempt {attempt}: {exc}")
            continue
        spec = mine_predicates(gtable)
        v = diff_violations(spec, btable, gtable)
        if not v.predicates:
            reasons.append(f"attempt {attempt}: faults left forwarding unchanged")
            continue
        changed_entries = sum(1 for k, a in gtable.entries.items() if btable.entries.get(k) != a)
        changed_prefixes = {p for p in gtable.universe if gtable.prefix_signature(p) != btable.prefix_signature(p)}
        loc = sum(len(t.splitlines()) for t in golden.values())
        meta = {
            "id": desc.scenario_id,
            "descriptor": desc.to_dict(),
            "attempt": attempt,
            "resample_reasons": reasons,
            "plan_seed": plan_seed,
            "features": sorted(feats),
            "faults": [f.to_dict() for f in faults],
            "fault_ids": [f.kind for f in faults],
            "collision_policy": "identical binding targets are never shared within a scenario",
            "plan_version": PLAN_VERSION,
            "grammar_version": GRAMMAR_VERSION,
            "catalog_version": CATALOG_VERSION,
            "mining_options": spec.options.to_dict(),
            "topology_stats": {
                "name": topology.name,
                "nodes": len(topology.routers),
                "links": len(topology.links),
                "tier": classify_tier(topology).value,
            },
            "stats": {
                "nodes": len(topology.routers),
                "loc": loc,
                "routes": len(gtable.entries),
                "predicates": len(spec),
                "lines_edited": diff.lines_edited,
                "routers_affected": len(diff.affected_routers),
                "routes_changed": changed_entries,
                "prefixes_changed": len(changed_prefixes),
                "predicates_changed": len(v),
            },
        }
        return Scenario(desc.scenario_id, desc, topology, sorted(feats), plan_seed, golden, broken, diff,
                        spec, v, gtable, meta, plan.to_json())
    raise GenerationError("; ".join(reasons))


def write_scenario(sc: Scenario, root: Path) -> Path:
    d = root / sc.id
    (d / "configs").mkdir(parents=True, exist_ok=True)
    (d / "broken").mkdir(exist_ok=True)
    dump_json(d / "topology.json", sc.topology.to_dict())
    (d / "plan.json").write_text(sc.plan_json)
    for r, text in sorted(sc.golden.items()):
        (d / "configs" / f"{r}.cfg").write_text(text)
    for r, text in sorted(sc.broken.items()):
        (d / "broken" / f"{r}.cfg").write_text(text)
    dump_json(d / "diff.json", sc.diff.to_dict())
    dump_json(d / "spec.json", sc.spec.to_dict())
    dump_json(d / "violations.json", sc.violations.to_dict())
    dump_json(d / "fib-golden.json", sc.golden_table.to_dict())
    dump_json(d / "metadata.json", sc.metadata)
    return d


def read_configs(d: Path) -> dict[str, str]:
    return {p.stem: p.read_text() for p in sorted(d.glob("*.cfg"))}


@dataclass
class LoadedScenario:
    id: str
    path: Path
    topology: Topology
    golden: dict[str, str]
    broken: dict[str, str]
    diff: GroundTruthDiff
    spec: PredicateSet
    violations: PredicateSet
    golden_table: ForwardingTable
    metadata: dict


def load_scenario(d: str | Path) -> LoadedScenario:
    d = Path(d)
    meta = json.loads((d / "metadata.json").read_text())
    return LoadedScenario(
        meta.get("id", d.name),
        d,
        load_topology(json.loads((d / "topology.json").read_text())),
        read_configs(d / "configs"),
        read_configs(d / "broken"),
        GroundTruthDiff.from_dict(json.loads((d / "diff.json").read_text())),
        PredicateSet.from_dict(json.loads((d / "spec.json").read_text())),
        PredicateSet.from_dict(json.loads((d / "violations.json").read_text())),
        ForwardingTable.from_dict(json.loads((d / "fib-golden.json").read_text())),
        meta,
    )


def tier_pools(topologies: dict[str, Topology], stratify: bool = True) -> dict[Tier, list[str]]:
    pools = {tier: [] for tier in Tier}
    for name, t in topologies.items():
        pools[classify_tier(t)].append(name)
    missing = [t.value for t in Tier if not pools[t]]
    if missing:
        if stratify:
            raise GenerationError(f"no topology for tier(s) {', '.join(missing)}; pass --no-stratify to relax")
        for tier in Tier:
            if not pools[tier]:
                pools[tier] = sorted(topologies)
    return {t: sorted(v) for t, v in pools.items()}


def _generate_one(args):
    desc, topology, out = args
    try:
        sc = build_scenario(desc, topology)
    except GenerationError as exc:
        return desc, None, str(exc)
    write_scenario(sc, out)
    return desc, sc.id, None


def generate_dataset(
    topologies: dict[str, Topology],
    out: str | Path,
    seed: int = 0,
    stratify: bool = True,
    kinds: list[str] | None = None,
    collection: FaultSetCollection | None = None,
    limit: int | None = None,
    parallel: int = 1,
) -> dict:
    """Generate a dataset tree under ``out`` and return its manifest.

    ``limit`` keeps only the first N descriptors (smoke datasets).
    """
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    if not os.access(out, os.W_OK):
        raise GenerationError(f"{out} is not writable")
    pools = tier_pools(topologies, stratify)
    kinds = kinds or [k.id for k in CATALOG]
    if collection is None:
        collection = pairwise_greedy(kinds, kind_pair_feasible, seed)
    descs = stratified_instantiate(collection, pools, seed)
    if limit is not None:
        descs = descs[:limit]
    jobs = [(d, topologies[d.topology], out) for d in descs]
    if parallel > 1:
        with ProcessPoolExecutor(parallel) as ex:
            results = list(ex.map(_generate_one, jobs))
    else:
        results = [_generate_one(j) for j in jobs]
    scenarios, failures = [], []
    for desc, sid, err in results:
        if sid is None:
            failures.append({**desc.to_dict(), "reason": err})
        else:
            scenarios.append({**desc.to_dict(), "path": sid})
    manifest = {
        "seed": seed,
        "stratified": stratify,
        "catalog_version": CATALOG_VERSION,
        "plan_version": PLAN_VERSION,
        "grammar_version": GRAMMAR_VERSION,
        "collection": collection.to_dict(),
        "multi_sets": len(collection.multi_sets),
        "monosets": len(collection.monosets),
        "feasible_pairs": len(feasible_pairs(collection.kinds, kind_pair_feasible)),
        "pools": {t.value: v for t, v in pools.items()},
        "topology_digests": {n: _digest(topologies[n]) for n in sorted(topologies)},
        "expected_scenarios": len(descs),
        "scenarios": scenarios,
        "failures": failures,
    }
    dump_json(out / "manifest.json", manifest)
    return manifest


def _digest(t: Topology) -> str:
    return hashlib.sha256(json.dumps(t.to_dict(), sort_keys=True).encode()).hexdigest()[:16]


def load_manifest(root: str | Path) -> dict:
    return json.loads((Path(root) / "manifest.json").read_text())


def load_topologies(path: str | Path) -> dict[str, Topology]:
    tops = load_directory(path)
    if not tops:
        raise GenerationError(f"no topologies found under {path}")
    return tops


__all__ = [
    "GenerationError", "LoadedScenario", "Scenario", "SamplerError", "build_scenario", "generate_dataset",
    "load_manifest", "load_scenario", "load_topologies", "read_configs", "tier_pools", "write_scenario",
]
