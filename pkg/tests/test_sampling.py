import numpy as np

from nodalcount.graph import _component_count, star_graph
from nodalcount.sampling import (
    derive_seed,
    planted_spectrum_matrix,
    random_bipartite_matching_graph,
    random_connected_graph,
    random_nonpositive_path,
    random_supported_matrix,
    random_tree,
)
from nodalcount.spectral import GENERAL, ZERO_DIAGONAL, check_ncc


def is_connected(g):
    return _component_count(g.n, g.edges) == 1


def test_same_seed_same_bytes():
    g = random_connected_graph(8, seed=3)
    assert g == random_connected_graph(8, seed=3)
    a1 = random_supported_matrix(g, seed=5).entries
    a2 = random_supported_matrix(g, seed=5).entries
    assert a1.tobytes() == a2.tobytes()


def test_derive_seed():
    assert derive_seed(0, "a") == derive_seed(0, "a")
    assert derive_seed(0, "a") != derive_seed(0, "b")
    assert derive_seed(1, "a") != derive_seed(0, "a")
    assert 0 <= derive_seed(2**64 - 1, "x") < 2**64


def test_generic_ncc():
    g = random_connected_graph(7, seed=1)
    hits = sum(check_ncc(random_supported_matrix(g, GENERAL, seed=s)).satisfied for s in range(100))
    assert hits >= 99


def test_star_zero_diagonal_never_ncc():
    g = star_graph(4)
    assert not any(check_ncc(random_supported_matrix(g, ZERO_DIAGONAL, seed=s)).satisfied for s in range(50))


def test_tree():
    for s in range(10):
        t = random_tree(9, seed=s)
        assert t.n_edges == 8 and is_connected(t)


def test_bipartite_has_matching():
    g = random_bipartite_matching_graph(8, seed=2)
    assert is_connected(g)
    adj = g.adjacency_matrix()
    colors = np.zeros(8, dtype=int) - 1
    colors[0] = 0
    stack = [0]
    while stack:
        u = stack.pop()
        for v in np.flatnonzero(adj[u]):
            if colors[v] < 0:
                colors[v] = 1 - colors[u]
                stack.append(v)
            assert colors[v] != colors[u]


def test_planted_spectrum():
    m = planted_spectrum_matrix([1.0, 2.0, 5.0], seed=0)
    assert np.allclose(np.linalg.eigvalsh(m), [1, 2, 5])


def test_nonpositive_path():
    a = random_nonpositive_path(6, seed=1)
    assert np.all(a.entries <= 0) and check_ncc(a).satisfied
