import json
import math

import numpy as np
import pytest

from rolemap import (
    AttributedGraph,
    Hyperparams,
    ModelParams,
    build_map,
    coords_tsv,
    d_map,
    fit,
    load_map,
    objective,
    reduce_roles,
    render_dot,
    save_map,
    zoom,
)
from rolemap.cartographer import ZoomSpec, map_doc
from rolemap.role_model import params_hash
from conftest import random_instance

LN4 = math.log(4.0)


def toy_graph(n=4, l=1):
    attrs = np.zeros((n, l)) if l else None
    names = [f"a{i}" for i in range(l)]
    return AttributedGraph([f"v{i}" for i in range(n)],
                           [(i, i + 1) for i in range(n - 1)],
                           attr_names=names, attrs=attrs)


# -- build_map ----------------------------------------------------------------

def test_build_map_unit_mode_values():
    g = toy_graph(n=4, l=2)
    r = np.array([[0.0, LN4], [LN4, 0.0]])
    m = ModelParams(np.ones((4, 2)), r, np.zeros((2, 2)))
    nm = build_map(m, g, c_mode="unit", c=1.0)
    assert nm.omega[0, 0] == 0.0           # r = 0 -> omega = 0
    assert nm.omega[0, 1] == pytest.approx(0.75)
    assert np.all(nm.psi == 0.5)           # w = 0 -> psi = 0.5
    assert nm.c_used == [1.0, 1.0]
    assert nm.model_ref == params_hash(m)


def test_build_map_unit_mode_scales_with_c():
    g = toy_graph(n=4, l=1)
    m = ModelParams(np.ones((4, 2)), np.full((2, 2), LN4), np.ones((2, 1)))
    nm = build_map(m, g, c_mode="unit", c=2.0)
    assert nm.omega[0, 1] == pytest.approx(1.0 - math.exp(-4.0 * LN4))
    assert nm.psi[0, 0] == pytest.approx(1.0 / (1.0 + math.exp(-2.0)))


def test_build_map_mean_mode_average_affiliation():
    g = toy_graph(n=4, l=1)
    x = np.array([[2.0, 1.0], [0.0, 1.0], [2.0, 1.0], [0.0, 1.0]])
    m = ModelParams(x, np.full((2, 2), 0.3), np.ones((2, 1)))
    nm = build_map(m, g, c_mode="mean")
    assert nm.c_used[0] == pytest.approx(2.0)  # mean over the two affiliated nodes
    assert nm.c_used[1] == pytest.approx(1.0)
    assert nm.omega[0, 1] == pytest.approx(-math.expm1(-2.0 * 1.0 * 0.3))
    assert nm.psi[0, 0] == pytest.approx(1.0 / (1.0 + math.exp(-2.0)))


def test_build_map_mean_mode_empty_role_warns():
    g = toy_graph(n=3, l=0)
    x = np.array([[1.0, 0.0], [1.0, 0.0], [1.0, 0.0]])
    m = ModelParams(x, np.eye(2) * 0.5, np.zeros((2, 0)))
    with pytest.warns(UserWarning, match="no affiliated nodes"):
        nm = build_map(m, g, c_mode="mean")
    assert nm.c_used[1] == 1.0


def test_build_map_main_role_and_ties():
    g = toy_graph(n=3, l=0)
    x = np.array([[0.2, 0.9], [0.5, 0.5], [0.0, 0.0]])
    m = ModelParams(x, 0.5 * np.ones((2, 2)), np.zeros((2, 0)))
    nm = build_map(m, g)
    assert list(nm.main_role) == [1, 0, 0]  # ties and all-zero rows -> role 0
    assert np.array_equal(nm.node_coords, x)
    assert nm.landmark_ids == ["r1", "r2"]


def test_build_map_monotone_in_parameters():
    g = toy_graph(n=4, l=1)
    rng = np.random.default_rng(0)
    r = rng.uniform(0, 2, (3, 3))
    r = 0.5 * (r + r.T)
    w = rng.normal(size=(3, 1))
    m = ModelParams(np.ones((4, 3)), r, w)
    nm = build_map(m, g)
    order_r = np.argsort(r, axis=None)
    assert np.array_equal(np.argsort(nm.omega, axis=None), order_r)
    assert np.array_equal(np.argsort(nm.psi[:, 0]), np.argsort(w[:, 0]))


def test_build_map_permutation_equivariance():
    g, m = random_instance(3, n=6, k=3, l=2)
    nm = build_map(m, g)
    perm = np.array([2, 0, 1])
    mp = ModelParams(m.X[:, perm], m.R[np.ix_(perm, perm)], m.W[perm, :])
    nmp = build_map(mp, g)
    assert np.allclose(nmp.psi, nm.psi[perm, :])
    assert np.allclose(nmp.omega, nm.omega[np.ix_(perm, perm)])


def test_build_map_omega_symmetry_iff_undirected():
    g, m = random_instance(4, n=6, k=3, l=1)
    assert np.array_equal(build_map(m, g).omega, build_map(m, g).omega.T)
    gd, md = random_instance(4, n=6, k=3, l=1, directed=True)
    assert not np.array_equal(build_map(md, gd).omega, build_map(md, gd).omega.T)


# -- reduce and d_map -----------------------------------------------------------

def test_reduce_drops_listed_roles():
    rng = np.random.default_rng(1)
    m = ModelParams(rng.uniform(0, 1, (5, 3)), rng.uniform(0, 1, (3, 3)),
                    rng.normal(size=(3, 2)), directed=True)
    red = reduce_roles(m, {1})
    assert red.X.shape == (5, 2) and red.R.shape == (2, 2) and red.W.shape == (2, 2)
    assert np.array_equal(red.X, m.X[:, [0, 2]])
    assert np.array_equal(red.R, m.R[np.ix_([0, 2], [0, 2])])
    assert np.array_equal(red.W, m.W[[0, 2], :])


def test_reduce_empty_is_identity():
    _, m = random_instance(5, n=4, k=3, l=1)
    red = reduce_roles(m, set())
    assert np.array_equal(red.X, m.X) and np.array_equal(red.R, m.R)


def test_reduce_matches_mask_bookkeeping_oracle():
    rng = np.random.default_rng(2)
    m = ModelParams(rng.uniform(0, 1, (6, 4)), rng.uniform(0, 1, (4, 4)),
                    rng.normal(size=(4, 3)), directed=True)
    drop = [1, 3]
    keep = [k for k in range(4) if k not in drop]
    red = reduce_roles(m, drop)
    # oracle: zero out dropped coordinates, then compare surviving entries
    zx, zr, zw = m.X.copy(), m.R.copy(), m.W.copy()
    zx[:, drop] = 0.0
    zr[drop, :] = 0.0
    zr[:, drop] = 0.0
    zw[drop, :] = 0.0
    assert np.array_equal(red.X, zx[:, keep])
    assert np.array_equal(red.R, zr[np.ix_(keep, keep)])
    assert np.array_equal(red.W, zw[keep, :])


def test_reduce_rejects_bad_index():
    _, m = random_instance(6, n=4, k=2, l=0)
    with pytest.raises(ValueError):
        reduce_roles(m, {5})


def test_d_map_zero_for_appended_subroles():
    rng = np.random.default_rng(3)
    parent = ModelParams(rng.uniform(0, 1, (5, 3)), rng.uniform(0, 1, (3, 3)),
                         rng.normal(size=(3, 2)), directed=True)
    base = reduce_roles(parent, {1})
    child = ModelParams(
        np.hstack([base.X, rng.uniform(0, 1, (5, 2))]),
        np.pad(base.R, ((0, 2), (0, 2))) + np.diag([0, 0, 0.3, 0.4]),
        np.vstack([base.W, rng.normal(size=(2, 2))]),
        directed=True)
    assert d_map(child, parent, new_roles=[2, 3], parent_roles=[1]) == 0.0


def test_d_map_single_perturbation():
    rng = np.random.default_rng(4)
    parent = ModelParams(rng.uniform(0, 1, (5, 3)), rng.uniform(0, 1, (3, 3)),
                         rng.normal(size=(3, 2)), directed=True)
    base = reduce_roles(parent, {0})
    child = ModelParams(np.hstack([base.X, rng.uniform(0, 1, (5, 2))]),
                        np.pad(base.R, ((0, 2), (0, 2))),
                        np.vstack([base.W, rng.normal(size=(2, 2))]),
                        directed=True)
    child.X[2, 0] += 1e-3
    assert d_map(child, parent, [2, 3], [0]) == pytest.approx(1e-6, rel=1e-9)


def test_d_map_matches_flatten_oracle():
    rng = np.random.default_rng(5)
    a = ModelParams(rng.uniform(0, 1, (5, 3)), rng.uniform(0, 1, (3, 3)),
                    rng.normal(size=(3, 2)), directed=True)
    b = ModelParams(rng.uniform(0, 1, (5, 3)), rng.uniform(0, 1, (3, 3)),
                    rng.normal(size=(3, 2)), directed=True)
    got = d_map(a, b, [2], [2])
    ra, rb = reduce_roles(a, [2]), reduce_roles(b, [2])
    flat = lambda m: np.concatenate([m.X.ravel(), m.R.ravel(), m.W.ravel()])
    assert got == pytest.approx(float(((flat(ra) - flat(rb)) ** 2).sum()), rel=1e-12)


# -- zoom -----------------------------------------------------------------------

@pytest.fixture(scope="module")
def fitted_parent(small_comm_module):
    g, _ = small_comm_module
    h = Hyperparams(seed=1, max_outer=40)
    m, _ = fit(g, 3, h)
    return g, m, h


@pytest.fixture(scope="module")
def small_comm_module():
    from rolemap.synthgen import PlantedSpec, plant_params, sample_graph
    spec = PlantedSpec("comm", n=90, k=3, l=3, seed=17)
    planted = plant_params(spec)
    return sample_graph(planted, seed=17), planted


def test_zoom_landmark_count_and_ids(fitted_parent):
    g, parent, h = fitted_parent
    spec = ZoomSpec(parent_params=parent, split_role=1, beta=0.002)
    child, nm = zoom(g, spec, h)
    assert child.n_roles == parent.n_roles + 1
    assert nm.landmark_ids == ["r1", "r3", "r2.1", "r2.2"]
    assert nm.lineage["split_role"] == 1
    assert nm.lineage["split_role_id"] == "r2"
    assert nm.lineage["child_ids"] == ["r2.1", "r2.2"]
    assert nm.lineage["parent"] == params_hash(parent)


def test_zoom_beta_zero_equals_warm_started_fit(fitted_parent):
    g, parent, h = fitted_parent
    spec = ZoomSpec(parent_params=parent, split_role=0, beta=0.0)
    child, nm = zoom(g, spec, h)
    # reconstruct the same warm start by hand and run a plain fit
    from rolemap.cartographer import _append_subrole_blocks
    rng = np.random.default_rng(h.seed)
    start = _append_subrole_blocks(reduce_roles(parent, [0]), 2, rng)
    ref, _ = fit(g, child.n_roles, h, init=start)
    assert np.array_equal(child.X, ref.X)
    assert np.array_equal(child.R, ref.R)
    assert np.array_equal(child.W, ref.W)


def test_zoom_large_beta_pins_non_split_blocks(fitted_parent):
    g, parent, h = fitted_parent
    spec = ZoomSpec(parent_params=parent, split_role=2, beta=1e6)
    child, _ = zoom(g, spec, h)
    kept_child = reduce_roles(child, [parent.n_roles - 1, parent.n_roles])
    kept_parent = reduce_roles(parent, [2])
    diff = max(np.abs(kept_child.X - kept_parent.X).max(),
               np.abs(kept_child.R - kept_parent.R).max(),
               np.abs(kept_child.W - kept_parent.W).max())
    assert diff <= 1e-3


def test_zoom_dmap_non_increasing_in_beta(fitted_parent):
    g, parent, h = fitted_parent
    dists = []
    for beta in (0.0, 0.002, 0.2):
        spec = ZoomSpec(parent_params=parent, split_role=0, beta=beta)
        child, _ = zoom(g, spec, h)
        dists.append(d_map(child, parent, [parent.n_roles - 1, parent.n_roles], [0]))
    assert dists[0] >= dists[1] >= dists[2]


def test_zoom_validates_inputs(fitted_parent):
    g, parent, h = fitted_parent
    with pytest.raises(ValueError):
        zoom(g, ZoomSpec(parent_params=parent, split_role=99), h)
    with pytest.raises(ValueError):
        zoom(g, ZoomSpec(parent_params=parent, split_role=0, n_subroles=1), h)


# -- exports ----------------------------------------------------------------------

def test_map_doc_round_trip(tmp_path):
    g, m = random_instance(7, n=6, k=3, l=2)
    nm = build_map(m, g)
    path = tmp_path / "map.json"
    save_map(path, nm)
    nm2 = load_map(path)
    assert nm2.landmark_ids == nm.landmark_ids
    assert np.array_equal(nm2.psi, nm.psi)
    assert np.array_equal(nm2.omega, nm.omega)
    assert list(nm2.main_role) == list(nm.main_role)
    assert nm2.model_ref == nm.model_ref
    assert not nm2.directed


def test_map_doc_schema_fields(tmp_path):
    g, m = random_instance(8, n=5, k=2, l=1)
    doc = map_doc(build_map(m, g))
    assert set(doc) == {"version", "K", "landmark_ids", "psi", "omega",
                        "c_used", "main_role", "lineage", "attr_names",
                        "model_ref"}
    assert doc["K"] == 2 and len(doc["main_role"]) == 5


def test_coords_tsv_layout():
    g, m = random_instance(9, n=5, k=3, l=0)
    nm = build_map(m, g)
    lines = coords_tsv(nm).strip().split("\n")
    assert lines[0].split("\t") == nm.landmark_ids
    assert len(lines) == 1 + 5
    row0 = [float(x) for x in lines[1].split("\t")]
    assert row0 == pytest.approx(list(m.X[0]))


def test_render_dot_counts_and_threshold():
    g = toy_graph(n=4, l=2)
    r = np.array([[0.0, 2.0, 0.001], [2.0, 0.5, 0.0], [0.001, 0.0, 3.0]])
    m = ModelParams(np.ones((4, 3)), r, np.array([[1.0, -1.0],
                                                  [0.5, 0.2],
                                                  [0.0, 2.0]]))
    nm = build_map(m, g)
    dot = render_dot(nm, omega_min=0.05)
    node_lines = [l for l in dot.splitlines() if l.strip().startswith("n") and "[label=" in l and "--" not in l]
    edge_lines = [l for l in dot.splitlines() if "--" in l]
    assert len(node_lines) == 3
    support = sum(1 for k in range(3) for l in range(k, 3) if nm.omega[k, l] >= 0.05)
    assert len(edge_lines) == support
    # roads below the threshold are omitted
    assert nm.omega[0, 2] < 0.05


def test_render_dot_directed_uses_arrows():
    g, m = random_instance(10, n=5, k=2, l=1, directed=True)
    nm = build_map(m, g)
    dot = render_dot(nm, omega_min=0.0)
    assert dot.startswith("digraph") and "->" in dot


def test_render_dot_labels_top_attributes():
    g = toy_graph(n=3, l=4)
    w = np.array([[3.0, 1.0, 2.0, -1.0]]).T.reshape(1, 4)
    m = ModelParams(np.ones((3, 1)), np.zeros((1, 1)), w.reshape(1, 4))
    nm = build_map(m, g)
    dot = render_dot(nm)
    label = [l for l in dot.splitlines() if "label=" in l and "n0" in l][0]
    # top-3 attributes by psi, descending
    assert label.index("a0") < label.index("a2") < label.index("a1")
    assert "a3" not in label
