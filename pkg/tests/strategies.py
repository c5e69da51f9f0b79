"""Hypothesis strategies shared across test modules."""

from hypothesis import strategies as st

from conftest import make_topology
from netrepair.plan import FEATURES


@st.composite
def topologies(draw, min_nodes=3, max_nodes=14):
    n = draw(st.integers(min_nodes, max_nodes))
    edges = set()
    for i in range(1, n):
        j = draw(st.integers(0, i - 1))
        edges.add((f"r{j:02d}", f"r{i:02d}"))
    extra = draw(st.lists(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)), max_size=n))
    for a, b in extra:
        if a != b:
            edges.add((f"r{min(a, b):02d}", f"r{max(a, b):02d}"))
    return make_topology(f"g{n}", sorted(edges))


features = st.sets(st.sampled_from(FEATURES), max_size=8)
