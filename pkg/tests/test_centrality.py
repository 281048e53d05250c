import networkx as nx
import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from ccembed import centrality as cent
from ccembed.errors import ConfigError, DisconnectedGraphError
from ccembed.graph import Graph
from oracles import brute_betweenness_counts, brute_closeness, random_connected_adjacency


def test_path_closeness(path3):
    np.testing.assert_allclose(cent.closeness(path3).values, [1 / 3, 1 / 2, 1 / 3], rtol=0, atol=1e-15)


def test_star_betweenness(star4):
    b = cent.betweenness(star4).values
    np.testing.assert_allclose(b, [1, 0, 0, 0])
    np.testing.assert_allclose(cent.betweenness(star4, "conventional").values, [1, 0, 0, 0])


def test_path4_betweenness(path4):
    np.testing.assert_allclose(cent.betweenness(path4).values, [0, 0.5, 0.5, 0])


def test_complete_graph_betweenness_is_zero(k3):
    np.testing.assert_array_equal(cent.betweenness(k3).values, 0)


def test_degree(star4):
    np.testing.assert_array_equal(cent.degree_centrality(star4).values, [3, 1, 1, 1])


def test_oracle_small_graphs(rng):
    for _ in range(60):
        n = int(rng.integers(2, 9))
        A = random_connected_adjacency(n, rng, float(rng.uniform(0.05, 0.6)))
        g = Graph.from_dense(A)
        counts, frac = brute_betweenness_counts(A)
        expect = counts / counts.sum() if counts.sum() else np.zeros(n)
        np.testing.assert_allclose(cent.betweenness(g).values, expect, rtol=0, atol=1e-12)
        pairs = (n - 1) * (n - 2) / 2
        conv = frac / pairs if pairs else np.zeros(n)
        np.testing.assert_allclose(cent.betweenness(g, "conventional").values, conv, rtol=0, atol=1e-12)
        np.testing.assert_allclose(cent.closeness(g).values, brute_closeness(A), rtol=0, atol=1e-12)


def test_conventional_matches_networkx(rng):
    A = random_connected_adjacency(40, rng, 0.08)
    g = Graph.from_dense(A)
    ref = nx.betweenness_centrality(nx.from_numpy_array(A), normalized=True)
    np.testing.assert_allclose(cent.betweenness(g, "conventional").values,
                               [ref[k] for k in range(40)], atol=1e-13)


def test_disconnected_and_unknown():
    g = Graph.from_edges(4, [(0, 1), (2, 3)])
    with pytest.raises(DisconnectedGraphError):
        cent.closeness(g)
    with pytest.raises(DisconnectedGraphError):
        cent.betweenness(g)
    with pytest.raises(ConfigError):
        cent.compute(Graph.from_edges(2, [(0, 1)]), "pagerank")
    with pytest.raises(ConfigError):
        cent.betweenness(Graph.from_edges(2, [(0, 1)]), "bogus")


def test_radius_map_path(path3):
    rm = cent.radius_map(cent.betweenness(path3), path3)
    np.testing.assert_allclose(rm.radii, [1, 0, 1])
    assert rm.params["diameter"] == 2


def test_radius_map_uniform_and_floor(k3):
    rm = cent.radius_map(cent.degree_centrality(k3), k3)
    np.testing.assert_allclose(rm.radii, 0.5)
    rm = cent.radius_map(np.array([0.0, 1.0]), diam=4, floor=0.25)
    np.testing.assert_allclose(rm.radii, [2.0, 0.25])


def test_radius_map_exponential():
    rm = cent.radius_map(np.array([0.0, 1.0]), transform="exponential", alpha=2.0, beta=1.0)
    np.testing.assert_allclose(rm.radii, [2.0, 2.0 / np.e])
    np.testing.assert_allclose(cent.radius_map(np.array([0.3, 4.0]), transform="exponential",
                                               beta=0.0).radii, 1.0)
    for kw in ({"alpha": 0.0}, {"beta": -1.0}):
        with pytest.raises(ConfigError):
            cent.radius_map(np.ones(2), transform="exponential", **kw)
    with pytest.raises(ConfigError):
        cent.radius_map(np.ones(2), diam=2, floor=-1)
    with pytest.raises(ConfigError):
        cent.radius_map(np.ones(2), diam=2, transform="log")


vectors = st.lists(st.floats(0, 100, allow_nan=False), min_size=2, max_size=30).map(np.array)


@settings(max_examples=100, deadline=None)
@given(vectors, st.sampled_from(["diameter_linear", "exponential"]))
def test_radius_map_is_monotone_decreasing(c, transform):
    r = cent.radius_map(c, diam=6, transform=transform, beta=0.1).radii
    order = np.argsort(c, kind="stable")
    assert np.all(np.diff(r[order]) <= 1e-12)
    assert np.all(r >= 0)


@settings(max_examples=100, deadline=None)
@given(vectors, st.floats(0.01, 50), st.floats(-50, 50))
def test_diameter_linear_affine_invariance(c, scale, shift):
    # the spread must survive rounding after the affine map
    spread = np.ptp(c)
    assume(spread == 0 or spread > 1e-6 * (abs(shift) + np.abs(c).max() + 1))
    r1 = cent.radius_map(c, diam=5).radii
    r2 = cent.radius_map(scale * c + shift, diam=5).radii
    np.testing.assert_allclose(r1, r2, atol=1e-9)
    if c.max() > c.min():
        assert r1.max() == pytest.approx(2.5)
        assert r1.min() == pytest.approx(0.0, abs=1e-12)


def test_histogram():
    edges, counts = cent.centrality_histogram(np.array([0.0, 0.5, 1.0, 1.0]), bins=2)
    np.testing.assert_allclose(edges, [0, 0.5, 1])
    np.testing.assert_array_equal(counts, [1, 3])
    edges, counts = cent.centrality_histogram(np.full(5, 2.0), bins=4)
    assert counts.sum() == 5 and counts[0] == 5 and len(edges) == 5
    with pytest.raises(ConfigError):
        cent.centrality_histogram(np.ones(3), bins=0)


@pytest.mark.parametrize("backend", ["python", "cython"])
def test_brandes_backends_agree(backend, rng):
    from ccembed import kernels
    if backend not in kernels.available():
        pytest.skip("compiled kernels not built")
    g = Graph.from_dense(random_connected_adjacency(60, rng, 0.05))
    np.testing.assert_allclose(cent.betweenness(g, backend=backend).values,
                               cent.betweenness(g, backend="python").values, atol=1e-15)
