import sys
from pathlib import Path

import pytest
from hypothesis import settings

sys.path.insert(0, str(Path(__file__).parent))

settings.register_profile("default", deadline=None, max_examples=40)
settings.load_profile("default")

from netrepair.plan import build_plan  # noqa: E402
from netrepair.topo import bundled_topology_dir, load_directory, load_topology  # noqa: E402


def gml(edges) -> str:
    nodes = sorted({x for e in edges for x in e})
    ids = {n: i for i, n in enumerate(nodes)}
    parts = [f'node [ id {i} label "{n}" ]' for n, i in ids.items()]
    parts += [f"edge [ source {ids[a]} target {ids[b]} ]" for a, b in edges]
    return "graph [ " + " ".join(parts) + " ]"


def make_topology(name, edges):
    return load_topology(gml(edges), name)


@pytest.fixture(scope="session")
def bundled():
    return load_directory(bundled_topology_dir())


@pytest.fixture(scope="session")
def triangle():
    return make_topology("tri", [("A", "B"), ("B", "C"), ("A", "C")])


@pytest.fixture(scope="session")
def abilene(bundled):
    return bundled["abilene"]


@pytest.fixture(scope="session")
def rich_plan(abilene):
    return build_plan(abilene, {"route-reflection", "local-pref-policy", "prefix-lists", "static-routes",
                                "acl-in", "acl-out", "next-hop-self"}, 2)


SMOKE_SIZE = 30


@pytest.fixture(scope="session")
def smoke(tmp_path_factory, bundled):
    """A 30-scenario dataset over the bundled topologies with at most 20 nodes."""
    import time

    from netrepair.orchestrator import generate_dataset

    small = {n: t for n, t in bundled.items() if len(t.routers) <= 20}
    root = tmp_path_factory.mktemp("smoke")
    t0 = time.perf_counter()
    manifest = generate_dataset(small, root, seed=0, stratify=False, limit=SMOKE_SIZE)
    return root, manifest, time.perf_counter() - t0, small


ACCEPTANCE: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[n])
