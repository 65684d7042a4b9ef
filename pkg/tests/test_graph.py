import json

import networkx as nx
import numpy as np
import pytest

from nodalcount.exceptions import InvalidCover, InvalidGraph, ParseError
from nodalcount.graph import (
    CoverComponent,
    CycleCover,
    Graph,
    betti,
    bipartition,
    classify_determinantal,
    complete_graph,
    connecting_edge_set,
    cycle_graph,
    graph_from_dict,
    load_graph,
    path_graph,
    spanning_frame,
    star_graph,
    validate_cover,
)
from nodalcount.matching import has_perfect_matching, hopcroft_karp


class TestLoading:
    def test_triangle(self):
        g = load_graph('{"n":3,"edges":[[1,2],[2,3],[1,3]]}')
        assert g.n == 3 and g.edges == ((1, 2), (1, 3), (2, 3))

    def test_single_edge(self):
        assert load_graph('{"n":2,"edges":[[1,2]]}').n_edges == 1

    def test_disconnected(self):
        with pytest.raises(InvalidGraph):
            load_graph('{"n":4,"edges":[[1,2],[3,4]]}')

    @pytest.mark.parametrize("text", ["not json", '{"n":3}', '{"n":"3","edges":[]}', '{"n":2,"edges":[[1]]}'])
    def test_malformed(self, text):
        with pytest.raises(ParseError):
            load_graph(text)

    @pytest.mark.parametrize("edges", [((1, 1),), ((1, 2), (2, 1)), ((1, 3),)])
    def test_invalid_edges(self, edges):
        with pytest.raises(InvalidGraph):
            Graph(2, edges)

    def test_round_trip(self):
        g = cycle_graph(5)
        assert graph_from_dict(json.loads(json.dumps(g.to_dict()))) == g


@pytest.mark.parametrize("g, beta", [(path_graph(5), 0), (cycle_graph(5), 1), (complete_graph(5), 6)])
def test_betti(g, beta):
    assert betti(g) == beta


class TestFrames:
    def test_tree(self):
        assert spanning_frame(path_graph(4)).cotree_edges == ()

    def test_triangle(self):
        fr = spanning_frame(cycle_graph(3))
        assert fr.tree_edges == ((1, 2), (1, 3))
        assert fr.cotree_edges == ((2, 3),)

    def test_k4(self):
        fr = spanning_frame(complete_graph(4))
        assert fr.cotree_edges == ((2, 3), (2, 4), (3, 4))
        assert fr.consistent_with(complete_graph(4))


def test_bipartition():
    assert list(bipartition(path_graph(4))) == [1, -1, 1, -1]
    assert list(bipartition(cycle_graph(4))) == [1, -1, 1, -1]
    assert bipartition(cycle_graph(5)) is None


class TestClassifier:
    def test_triangle(self):
        v = classify_determinantal(cycle_graph(3))
        assert v.determinantal
        assert [c.kind for c in v.cover.components] == ["cycle"]

    def test_star(self):
        assert classify_determinantal(star_graph(3)).kind == "sub-determinantal"

    def test_c4(self):
        v = classify_determinantal(cycle_graph(4))
        assert [c.kind for c in v.cover.components] == ["edge", "edge"]
        validate_cover(cycle_graph(4), v.cover)

    def test_odd_path(self):
        assert not classify_determinantal(path_graph(5)).determinantal

    def test_matches_determinant_oracle(self):
        # random zero-diagonal matrices are invertible exactly on determinantal graphs
        rng = np.random.default_rng(3)
        for seed in range(30):
            h = nx.gnp_random_graph(7, 0.35, seed=seed)
            if not nx.is_connected(h):
                continue
            g = Graph(7, tuple((i + 1, j + 1) for i, j in h.edges()))
            m = np.zeros((7, 7))
            for i, j in g.edges:
                m[i - 1, j - 1] = m[j - 1, i - 1] = rng.standard_normal()
            invertible = abs(np.linalg.det(m)) > 1e-8
            assert classify_determinantal(g).determinantal == invertible
            assert classify_determinantal(g, "bruteforce").kind == classify_determinantal(g).kind

    def test_bad_method(self):
        with pytest.raises(ValueError):
            classify_determinantal(cycle_graph(3), "guess")


class TestCovers:
    def test_rejects_even_cycle(self):
        cover = CycleCover((CoverComponent("cycle", (1, 2, 3, 4)),))
        with pytest.raises(InvalidCover):
            validate_cover(cycle_graph(4), cover)

    def test_rejects_missing_vertex(self):
        cover = CycleCover((CoverComponent("edge", (1, 2)),))
        with pytest.raises(InvalidCover):
            validate_cover(path_graph(3), cover)

    def test_connecting_single(self):
        cover = classify_determinantal(cycle_graph(3)).cover
        assert connecting_edge_set(cycle_graph(3), cover)[0] == ()

    def test_connecting_p4(self):
        cover = CycleCover((CoverComponent("edge", (1, 2)), CoverComponent("edge", (3, 4))))
        assert connecting_edge_set(path_graph(4), cover)[0] == ((2, 3),)

    def test_connecting_c6(self):
        cover = CycleCover(tuple(CoverComponent("edge", (2 * i + 1, 2 * i + 2)) for i in range(3)))
        assert len(connecting_edge_set(cycle_graph(6), cover)[0]) == 2


class TestMatching:
    def test_against_networkx(self):
        rng = np.random.default_rng(0)
        for _ in range(40):
            n = int(rng.integers(1, 9))
            adj = [[v for v in range(n) if rng.random() < 0.3] for _ in range(n)]
            match = hopcroft_karp(adj, n)
            size = sum(1 for v in match if v >= 0)
            b = nx.Graph()
            b.add_nodes_from(range(n), bipartite=0)
            b.add_nodes_from(range(n, 2 * n), bipartite=1)
            b.add_edges_from((u, n + v) for u in range(n) for v in adj[u])
            ref = len(nx.bipartite.maximum_matching(b, top_nodes=range(n))) // 2
            assert size == ref
            for u, v in enumerate(match):
                if v >= 0:
                    assert v in adj[u]
            assert has_perfect_matching(adj, n) == (ref == n)
