import os
import random

import pytest

from setree.graphs import Graph


def k2():
    return Graph.from_edges(2, [(0, 1)])


def triangle():
    return Graph.from_edges(3, [(0, 1), (1, 2), (0, 2)])


def path(n):
    return Graph.from_edges(n, [(i, i + 1) for i in range(n - 1)])


def cycle(n):
    return Graph.from_edges(n, [(i, (i + 1) % n) for i in range(n)])


def star(n):
    """Hub 0 plus n-1 spokes."""
    return Graph.from_edges(n, [(0, i) for i in range(1, n)])


def two_triangles_bridge():
    """Triangles {0,1,2} and {3,4,5} joined by the edge 2-3."""
    return Graph.from_edges(
        6, [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5), (2, 3)]
    )


def random_connected_graph(rng: random.Random, n: int, extra_edge_prob: float = 0.3) -> Graph:
    """Random spanning tree plus a sprinkle of extra edges; always connected."""
    edges = set()
    order = list(range(n))
    rng.shuffle(order)
    for i in range(1, n):
        u = order[rng.randrange(i)]
        v = order[i]
        edges.add((min(u, v), max(u, v)))
    for u in range(n):
        for v in range(u + 1, n):
            if (u, v) not in edges and rng.random() < extra_edge_prob:
                edges.add((u, v))
    return Graph.from_edges(n, sorted(edges))


@pytest.fixture
def rng():
    return random.Random(12345)


def dataset_dir(name: str):
    """Locate a benchmark dataset directory, or None if not present.

    Looks under $SETREE_DATASETS, ./data and tests/data for <name>/ holding
    the flat files.  Benchmarks are fetched out of band (scripts/fetch_datasets.py).
    """
    roots = []
    env = os.environ.get("SETREE_DATASETS")
    if env:
        roots.append(env)
    here = os.path.dirname(os.path.abspath(__file__))
    roots.append(os.path.join(os.path.dirname(here), "data"))
    roots.append(os.path.join(here, "data"))
    for root in roots:
        candidate = os.path.join(root, name)
        if os.path.isfile(os.path.join(candidate, f"{name}_A.txt")):
            return candidate
    return None


def require_dataset(name: str) -> str:
    path = dataset_dir(name)
    if path is None:
        pytest.skip(
            f"{name} benchmark files not available in this environment "
            f"(no network access to fetch them); place the TU-format files under "
            f"data/{name}/ or set SETREE_DATASETS to run this check"
        )
    return path
