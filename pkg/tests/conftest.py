import numpy as np
import pytest

from rolemap import AttributedGraph, Hyperparams, ModelParams, PlantedSpec
from rolemap.synthgen import plant_params, sample_graph


def random_instance(seed, n=6, k=3, l=2, directed=False, p_edge=0.35,
                    low=0.05, high=1.0):
    """Random graph + params with entries bounded away from the clamp/kink
    region (all parameters >= ``low``)."""
    rng = np.random.default_rng(seed)
    edges = set()
    for u in range(n):
        for v in range(n):
            if u == v:
                continue
            if not directed and u > v:
                continue
            if rng.random() < p_edge:
                edges.add((u, v))
    attrs = (rng.random((n, l)) < 0.5).astype(float) if l else None
    names = [f"a{i}" for i in range(l)]
    g = AttributedGraph([f"v{i}" for i in range(n)], edges, directed=directed,
                        attr_names=names, attrs=attrs)
    x = rng.uniform(low, high, size=(n, k))
    r = rng.uniform(low, high, size=(k, k))
    if not directed:
        r = 0.5 * (r + r.T)
    w = rng.uniform(-high, high, size=(k, l))
    w[np.abs(w) < low] = low
    m = ModelParams(x, r, w, directed=directed)
    return g, m


@pytest.fixture
def path_graph():
    """a - b - c, undirected, no attributes."""
    return AttributedGraph(["a", "b", "c"], [(0, 1), (1, 2)])


@pytest.fixture
def default_hyper():
    return Hyperparams()


@pytest.fixture(scope="session")
def small_comm():
    """Planted community instance small enough for repeated fits in tests."""
    spec = PlantedSpec("comm", n=120, k=4, l=4, seed=7)
    planted = plant_params(spec)
    g = sample_graph(planted, seed=7)
    return g, planted
