import math

import numpy as np
import pytest

from nodalcount.constructions import dense_block_matrix, kn_zero_diag
from nodalcount.exceptions import AmbiguousClustering, PreconditionFailed, VanishingEntry
from nodalcount.graph import complete_graph, cycle_graph, path_graph
from nodalcount.sampling import planted_multiplicity_matrix, planted_spectrum_matrix, random_supported_matrix
from nodalcount.spectral import SupportedMatrix, check_ncc, eigensystem, nodal_counts
from nodalcount.transversality import (
    ConjugatedSubspace,
    MultiplicityProfile,
    SupportSubspace,
    check_multiplicity_lower_bound,
    check_transversality,
    commutator_space_dim,
    multiplicity_profile,
    multiplicity_surplus_floor,
    transversal_repair,
)


def _kron_rank(a):
    """Rank of X -> AX - XA on antisymmetric X, built from Kronecker products."""
    n = len(a)
    op = np.kron(np.eye(n), a) - np.kron(a.T, np.eye(n))
    cols = []
    for i in range(n):
        for j in range(i + 1, n):
            x = np.zeros((n, n))
            x[i, j], x[j, i] = 1.0, -1.0
            cols.append(op @ x.ravel(order="F"))
    if not cols:
        return 0
    return int(np.linalg.matrix_rank(np.array(cols).T, tol=1e-8 * (1 + np.abs(a).max())))


class TestSubspace:
    def test_dimensions(self):
        g = cycle_graph(5)
        assert SupportSubspace("sg", g).dimension == 10
        assert SupportSubspace("s0g", g).dimension == 5

    def test_unknown(self):
        with pytest.raises(ValueError):
            SupportSubspace("xx", cycle_graph(3))

    def test_projection(self):
        g = path_graph(3)
        w = SupportSubspace("sg", g)
        m = np.arange(9.0).reshape(3, 3)
        m = m + m.T
        p = w.project(m)
        assert p[0, 2] == 0 and p[0, 1] == m[0, 1] and w.contains(p)


class TestCommutatorDim:
    def test_identity(self):
        assert commutator_space_dim(np.eye(4)) == 0

    def test_simple(self):
        assert commutator_space_dim(np.diag([1.0, 2.0, 3.0])) == 3

    def test_double(self):
        assert commutator_space_dim(np.diag([1.0, 1.0, 2.0])) == 2

    def test_planted_against_kron(self):
        rng = np.random.default_rng(9)
        for _ in range(30):
            n = int(rng.integers(2, 8))
            parts = []
            while sum(parts) < n:
                parts.append(int(rng.integers(1, n - sum(parts) + 1)))
            a = planted_multiplicity_matrix(parts, rng)
            expected = math.comb(n, 2) - sum(math.comb(m, 2) for m in parts)
            assert commutator_space_dim(a) == expected == _kron_rank(a)

    def test_ambiguous(self):
        a = planted_spectrum_matrix([0.0, 1e-7, 1.0], seed=0)
        with pytest.raises(AmbiguousClustering):
            multiplicity_profile(a)

    def test_profile(self):
        a = planted_multiplicity_matrix([1, 3, 2], seed=4)
        assert multiplicity_profile(a).multiplicities == (1, 3, 2)


class TestTransversality:
    @pytest.mark.parametrize("n, beta", [(3, 1), (4, 2), (4, 3), (5, 4), (6, 8)])
    def test_dense(self, n, beta):
        a, _ = dense_block_matrix(n, beta)
        assert check_transversality(a, SupportSubspace("sg", a.graph)).transversal

    @pytest.mark.parametrize("n", [3, 4, 6])
    def test_kn(self, n):
        a = kn_zero_diag(n).matrix
        assert check_transversality(a, SupportSubspace("s0g", a.graph)).transversal

    def test_identity(self):
        v = check_transversality(np.eye(4), SupportSubspace("sg", cycle_graph(4)))
        assert not v.transversal and v.rank == 0

    def test_conjugation(self):
        g = cycle_graph(5)
        a = random_supported_matrix(g, seed=3).entries
        w = SupportSubspace("sg", g)
        q, _ = np.linalg.qr(np.random.default_rng(1).standard_normal((5, 5)))
        v1 = check_transversality(a, w)
        v2 = check_transversality(q @ a @ q.T, ConjugatedSubspace(w, q))
        assert (v1.transversal, v1.rank, v1.target) == (v2.transversal, v2.rank, v2.target)


class TestRepair:
    def test_fixed_point(self):
        a = random_supported_matrix(complete_graph(4), seed=0)
        es = eigensystem(a)
        rep = transversal_repair(a, es.vectors)
        assert rep.iterations == 0
        assert np.allclose(rep.matrix.entries, a.entries) and np.allclose(rep.rotation, np.eye(4))

    def test_dense(self):
        a, es = dense_block_matrix(3, 1)
        rep = transversal_repair(a, es.vectors)
        assert check_ncc(rep.matrix).satisfied
        assert np.array_equal(np.sign(rep.basis), np.sign(es.vectors))
        assert nodal_counts(rep.matrix, rep.basis).total == 4

    def test_kn4(self):
        r = kn_zero_diag(4)
        rep = transversal_repair(r.matrix, r.basis, SupportSubspace("s0g", r.matrix.graph))
        assert rep.matrix.mode == "zero-diagonal"
        assert check_ncc(rep.matrix).satisfied
        assert nodal_counts(rep.matrix, rep.basis).total == 9

    def test_distance_shrinks(self):
        a, es = dense_block_matrix(4, 2)
        dist = [transversal_repair(a, es.vectors, target_gap=g).distance for g in (1e-2, 5e-3, 2.5e-3)]
        assert dist[0] > dist[1] > dist[2]

    def test_not_transversal(self):
        g = cycle_graph(4)
        a = SupportedMatrix(g, np.eye(4) + 1e-3 * g.adjacency_matrix())
        with pytest.raises((PreconditionFailed, VanishingEntry)):
            transversal_repair(a)


class TestFloor:
    def test_simple(self):
        assert multiplicity_surplus_floor(MultiplicityProfile((1, 1, 1)), 2).floor == 0

    def test_single(self):
        assert multiplicity_surplus_floor(MultiplicityProfile((4,)), 2).floor == 6

    def test_guaranteed(self):
        rec = multiplicity_surplus_floor(MultiplicityProfile((2, 1)), 1)
        assert rec.floor == 1 and rec.bounds_guaranteed

    def test_lower_bound_simple(self):
        a = random_supported_matrix(cycle_graph(6), seed=2)
        es = eigensystem(a)
        for k in range(6):
            v = check_multiplicity_lower_bound(a, es.vectors[:, k], es.values[k])
            assert v.holds and v.counting == k + 1

    def test_lower_bound_vanishing(self, vanish):
        a, vectors = vanish
        with pytest.raises(VanishingEntry):
            check_multiplicity_lower_bound(a, vectors[:, 1], 0.0)

    def test_kn_nullspace_vectors(self):
        r = kn_zero_diag(5)
        counts = r.nodal.strong_counts
        # the n-2 middle vectors each cross n-1 edges
        assert all(c == 4 for c in counts[1:-1])
