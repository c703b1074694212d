import json
import math

import numpy as np
import pytest

from rolemap import (
    AttributedGraph,
    Hyperparams,
    ModelParams,
    attribute_probability,
    link_predictor,
    link_probability,
    load_model,
    log_likelihood_attrs,
    log_likelihood_links,
    objective,
    reconstruct_probabilities,
    save_model,
)
from conftest import random_instance
from oracles import (
    naive_link_prob,
    naive_log_likelihood_attrs,
    naive_log_likelihood_links,
    naive_objective,
)

LN2 = math.log(2.0)


def zero_model(n, k, l, directed=False):
    return ModelParams(np.zeros((n, k)), np.zeros((k, k)), np.zeros((k, l)),
                       directed=directed)


# -- predictors ---------------------------------------------------------------

def test_link_predictor_single_term():
    r = np.array([[0.0, LN2], [LN2, 0.0]])
    assert link_predictor([1.0, 0.0], r, [0.0, 1.0]) == pytest.approx(LN2)


def test_link_predictor_zero_membership():
    rng = np.random.default_rng(0)
    r = rng.uniform(0, 5, (3, 3))
    assert link_predictor(np.zeros(3), r, rng.uniform(0, 5, 3)) == 0.0


def test_link_predictor_matches_double_sum():
    rng = np.random.default_rng(1)
    x_u, x_v = rng.uniform(0, 2, 4), rng.uniform(0, 2, 4)
    r = rng.uniform(0, 2, (4, 4))
    _, rho = naive_link_prob(x_u, r, x_v)
    assert link_predictor(x_u, r, x_v) == pytest.approx(rho, rel=1e-12)


def test_link_predictor_shape_mismatch():
    with pytest.raises(ValueError):
        link_predictor([1.0], np.eye(2), [1.0, 0.0])


def test_link_probability_values():
    assert link_probability(0.0) == 0.0
    assert link_probability(LN2) == pytest.approx(0.5)
    assert link_probability(math.log(4.0)) == pytest.approx(0.75)


def test_link_probability_monotone_and_bounded():
    rhos = np.linspace(0, 20, 200)
    p = link_probability(rhos)
    assert np.all(np.diff(p) > 0) and p[0] == 0.0 and np.all(p < 1.0 + 1e-15)


def test_link_probability_rejects_negative():
    with pytest.raises(ValueError):
        link_probability(-0.1)


def test_attribute_probability_values():
    assert attribute_probability(np.zeros(3), np.ones(3)) == 0.5
    assert attribute_probability([math.log(3.0), 7.0], [1.0, 0.0]) == pytest.approx(0.75)


def test_attribute_probability_matches_direct():
    rng = np.random.default_rng(2)
    w, x = rng.normal(size=5), rng.uniform(0, 2, 5)
    mu = float(np.dot(w, x))
    assert attribute_probability(w, x) == pytest.approx(1.0 / (1.0 + math.exp(-mu)))


# -- likelihoods --------------------------------------------------------------

def test_links_loglik_zero_for_empty_model():
    g = AttributedGraph(["a", "b", "c"], [])
    assert log_likelihood_links(g, zero_model(3, 2, 0)) == 0.0


def test_links_loglik_matches_naive_toy():
    g = AttributedGraph(["a", "b", "c"], [(0, 1), (1, 2)])
    rng = np.random.default_rng(3)
    m = ModelParams(rng.uniform(0.1, 1, (3, 2)),
                    np.full((2, 2), 0.4), rng.normal(size=(2, 0)).reshape(2, 0))
    got = log_likelihood_links(g, m)
    assert got == pytest.approx(naive_log_likelihood_links(g, m), abs=1e-10)
    assert got <= 0.0


def test_links_loglik_clamps_zero_evidence_edge():
    g = AttributedGraph(["a", "b", "c"], [(0, 1)])
    m = zero_model(3, 2, 0)
    # one present edge with rho = 0 contributes log(eps); absent terms vanish
    assert log_likelihood_links(g, m, eps=1e-10) == pytest.approx(math.log(1e-10))


@pytest.mark.parametrize("directed", [False, True])
def test_links_loglik_cached_equals_naive(directed):
    for seed in range(4):
        g, m = random_instance(seed, n=11 if seed % 2 else 50, k=3, l=0,
                               directed=directed)
        got = log_likelihood_links(g, m)
        want = naive_log_likelihood_links(g, m)
        assert got == pytest.approx(want, abs=1e-8)


def test_attrs_loglik_half_probability():
    g = AttributedGraph(["a", "b"], [], attr_names=["t"], attrs=np.zeros((2, 1)))
    m = zero_model(2, 2, 1)
    assert log_likelihood_attrs(g, m) == pytest.approx(2.0 * math.log(0.5))


def test_attrs_loglik_at_clamp_boundary():
    eps = 1e-10
    g = AttributedGraph(["a", "b"], [], attr_names=["t"], attrs=np.ones((2, 1)))
    m = ModelParams(np.ones((2, 1)), np.zeros((1, 1)), np.full((1, 1), 1e6))
    assert log_likelihood_attrs(g, m, eps=eps) == pytest.approx(
        2 * 1 * math.log(1.0 - eps))


def test_attrs_loglik_matches_naive():
    g, m = random_instance(9, n=5, k=3, l=3)
    assert log_likelihood_attrs(g, m) == pytest.approx(
        naive_log_likelihood_attrs(g, m), abs=1e-10)


def test_attrs_loglik_zero_when_no_attributes():
    g = AttributedGraph(["a", "b"], [(0, 1)])
    assert log_likelihood_attrs(g, zero_model(2, 2, 0)) == 0.0


# -- objective ----------------------------------------------------------------

def test_objective_two_node_example():
    g = AttributedGraph(["a", "b"], [], attr_names=["t"], attrs=np.zeros((2, 1)))
    m = zero_model(2, 2, 1)
    h = Hyperparams(alpha=0.5, alpha_r=0.0, alpha_x=0.0)
    assert objective(g, m, h) == pytest.approx(-LN2)


def test_objective_alpha_zero_is_link_model():
    g, m = random_instance(4, n=7, k=2, l=2)
    h = Hyperparams(alpha=0.0, alpha_r=0.3, alpha_x=0.0)
    want = log_likelihood_links(g, m) - 0.3 * np.abs(m.R).sum()
    assert objective(g, m, h) == pytest.approx(want, abs=1e-10)


def test_objective_matches_naive():
    for seed in (0, 1):
        for directed in (False, True):
            g, m = random_instance(seed, n=8, k=3, l=2, directed=directed)
            h = Hyperparams(alpha=0.4, alpha_r=0.2, alpha_x=0.1)
            assert objective(g, m, h) == pytest.approx(naive_objective(g, m, h),
                                                       abs=1e-8)


def test_objective_invariant_under_role_permutation():
    g, m = random_instance(5, n=9, k=4, l=3)
    h = Hyperparams()
    perm = np.array([2, 0, 3, 1])
    mp = ModelParams(m.X[:, perm], m.R[np.ix_(perm, perm)], m.W[perm, :],
                     m.directed)
    assert objective(g, mp, h) == pytest.approx(objective(g, m, h), abs=1e-9)


def test_link_probs_monotone_in_r():
    g, m = random_instance(6, n=6, k=3, l=0)
    p0, _ = reconstruct_probabilities(g, m)
    m2 = m.copy()
    m2.R[1, 2] += 0.5
    m2.R[2, 1] += 0.5
    p1, _ = reconstruct_probabilities(g, m2)
    assert np.all(p1 >= p0 - 1e-15)


def test_predictor_symmetry_for_undirected_models():
    g, m = random_instance(7, n=8, k=3, l=0)
    p, _ = reconstruct_probabilities(g, m)
    assert np.array_equal(p, p.T)


# -- reconstruction -----------------------------------------------------------

def test_reconstruct_zero_model():
    g = AttributedGraph(["a", "b"], [(0, 1)], attr_names=["t"],
                        attrs=np.zeros((2, 1)))
    p, q = reconstruct_probabilities(g, zero_model(2, 2, 1))
    assert np.all(p == 0.0) and np.all(q == 0.5)


def test_reconstruct_matches_elementwise():
    g, m = random_instance(8, n=6, k=2, l=2)
    p, q = reconstruct_probabilities(g, m)
    for u in range(6):
        for v in range(6):
            if u == v:
                assert p[u, v] == 0.0
            else:
                want, _ = naive_link_prob(m.X[u], m.R, m.X[v])
                assert p[u, v] == pytest.approx(want, abs=1e-12)
    for v in range(6):
        for i in range(2):
            assert q[v, i] == pytest.approx(
                attribute_probability(m.W[:, i], m.X[v]), abs=1e-12)


def test_reconstruct_respects_dense_cap():
    g, m = random_instance(0, n=12, k=2, l=0)
    with pytest.raises(ValueError, match="cap"):
        reconstruct_probabilities(g, m, dense_cap=10)


# -- persistence --------------------------------------------------------------

def test_model_json_round_trip(tmp_path):
    g, m = random_instance(11, n=7, k=3, l=2)
    h = Hyperparams(seed=5)
    path = tmp_path / "model.json"
    save_model(path, m, g.node_ids, g.attr_names, hyperparams=h,
               objective_trace=[-3.5, -2.25])
    doc = load_model(path)
    assert np.array_equal(doc.params.X, m.X)  # repr round-trips float64 exactly
    assert np.array_equal(doc.params.R, m.R)
    assert np.array_equal(doc.params.W, m.W)
    assert doc.node_ids == g.node_ids
    assert doc.attr_names == g.attr_names
    assert doc.hyperparams["seed"] == 5
    assert doc.objective_trace == [-3.5, -2.25]


def test_model_json_l_zero_round_trip(tmp_path):
    g, m = random_instance(12, n=5, k=2, l=0)
    path = tmp_path / "model.json"
    save_model(path, m, g.node_ids, [])
    doc = load_model(path)
    assert doc.params.W.shape == (2, 0)


def test_model_params_validation():
    with pytest.raises(ValueError, match="nonnegative"):
        ModelParams(-np.ones((2, 2)), np.eye(2), np.zeros((2, 0))).validate()
    with pytest.raises(ValueError, match="symmetric"):
        ModelParams(np.ones((2, 2)), np.array([[0.0, 1.0], [0.0, 0.0]]),
                    np.zeros((2, 0)), directed=False).validate()
    asym = ModelParams(np.ones((2, 2)), np.array([[0.0, 1.0], [0.0, 0.0]]),
                       np.zeros((2, 0)), directed=True)
    asym.validate()


def test_hyperparams_validation():
    with pytest.raises(ValueError):
        Hyperparams(alpha=1.5).validate()
    with pytest.raises(ValueError):
        Hyperparams(eps=0.1).validate()
    with pytest.raises(ValueError):
        Hyperparams(c_mode="nope").validate()
    Hyperparams().validate()
