import math

import numpy as np
import pytest

from nodalcount.exceptions import DegenerateBase, UnresolvedMultiplicity
from nodalcount.graph import Graph, cycle_graph, star_graph
from nodalcount.perturbation import (
    _preserves_sign_structure,
    _sample_cube_surface,
    c4_exact_fraction,
    diag_perturbation_sign_survey,
    perturbation_series,
    random_perturbation,
    series_residual,
    sign_vanishing_entries,
    simplicity_radius,
    stabilized_signs,
)
from nodalcount.sampling import random_supported_matrix
from nodalcount.spectral import GENERAL, check_ncc, eigensystem, nodal_counts

A2 = np.diag([1.0, 2.0])
B2 = np.array([[0.0, -1.0], [-1.0, 0.0]])


class TestSimplicityRadius:
    def test_formula(self):
        assert simplicity_radius(np.diag([0.0, 1.0]), np.array([[0.0, 1.0], [1.0, 0.0]])) == pytest.approx(1.0)

    def test_zero_b(self):
        assert simplicity_radius(A2, np.zeros((2, 2))) == math.inf

    def test_identity(self):
        with pytest.raises(DegenerateBase):
            simplicity_radius(np.eye(3), np.ones((3, 3)))


class TestSeries:
    def test_two_by_two(self):
        s = perturbation_series(A2, B2, 1, order=1)
        assert s.lambda_coeffs[1] == pytest.approx(0.0)
        assert np.allclose(s.vector_coeffs[1], [0.0, 1.0])

    def test_commuting(self):
        rng = np.random.default_rng(0)
        m = rng.standard_normal((4, 4))
        a = m + m.T
        b = a @ a - 2 * a
        s = perturbation_series(a, b, 2, order=4)
        assert np.allclose(s.vector_coeffs[1:], 0.0, atol=1e-10)

    @pytest.mark.parametrize("order", [1, 2, 3, 4])
    def test_residual_decay(self, order):
        rng = np.random.default_rng(order)
        m = rng.standard_normal((5, 5))
        a, b = m + m.T, rng.standard_normal((5, 5))
        b = b + b.T
        for k in range(1, 6):
            s = perturbation_series(a, b, k, order=order)
            assert max(series_residual(a, b, s, j) for j in range(order + 1)) < 1e-10
            # truncated series against eigh at eps = 1e-3
            eps = 1e-3
            w, v = np.linalg.eigh(a + eps * b)
            lam = s.eigenvalue(eps)
            vec = s.eigenvector(eps)
            resid = np.linalg.norm((a + eps * b) @ vec - lam * vec)
            assert resid < 50 * eps ** (order + 1) * (1 + np.abs(b).max()) ** (order + 1)
            assert abs(lam - w[k - 1]) < 50 * eps ** (order + 1) * (1 + np.abs(b).max()) ** (order + 1)

    def test_multiple_branch_first_order(self):
        # repeated eigenvalue split by B; compare first-order vector with finite differences
        rng = np.random.default_rng(2)
        q, _ = np.linalg.qr(rng.standard_normal((4, 4)))
        a = (q * np.array([0.0, 1.0, 1.0, 3.0])) @ q.T
        a = (a + a.T) / 2
        m = rng.standard_normal((4, 4))
        b = m + m.T
        for k in (2, 3):
            s = perturbation_series(a, b, k, order=1)
            assert s.branch == "multiple" and s.peers == (2, 3)
            for eps in (1e-2, 1e-3, 1e-4):
                w, v = np.linalg.eigh(a + eps * b)
                exact = v[:, k - 1] * np.sign(v[:, k - 1] @ s.vector_coeffs[0])
                approx = s.eigenvector(eps)
                approx /= np.linalg.norm(approx)
                # first-order error is O(eps^2); the peer sign matters at O(eps)
                assert np.linalg.norm(exact - approx) < 5 * eps**2

    def test_unresolved(self):
        with pytest.raises(UnresolvedMultiplicity):
            perturbation_series(np.eye(3), np.eye(3), 1)


class TestStabilizedSigns:
    def test_two_by_two(self):
        st = stabilized_signs(A2, B2)
        assert list(st.signs[:, 0]) == [1, 1]
        assert list(st.signs[:, 1]) == [-1, 1]

    def test_already_ncc(self):
        a = random_supported_matrix(cycle_graph(5), seed=1)
        es = eigensystem(a)
        b = 1e-6 * random_perturbation(a.graph, GENERAL, np.random.default_rng(0))
        st = stabilized_signs(a.entries, b)
        assert np.array_equal(st.signs, np.sign(es.vectors))

    def test_star(self):
        g = star_graph(3)
        ok = 0
        for seed in range(10):
            b = random_perturbation(g, GENERAL, np.random.default_rng(seed))
            st = stabilized_signs(g.adjacency_matrix(), b)
            ok += not np.any(st.signs == 0)
        assert ok >= 8


class TestSigning:
    def test_vanish(self, vanish):
        a, _ = vanish
        sb = sign_vanishing_entries(a, seed=1)
        assert sb.total in (7, 8, 9)
        assert not np.any(sb.signs == 0)
        # signing agrees with the nonzero entries of the eigenbasis
        es = eigensystem(a)
        known = np.abs(es.vectors) > 1e-8
        assert np.array_equal(sb.signs[known], np.sign(es.vectors)[known])

    def test_two_seeds(self, vanish):
        a, _ = vanish
        for seed in (1, 2):
            assert sign_vanishing_entries(a, seed=seed).total in (7, 8, 9)

    def test_ncc_unchanged(self):
        a = random_supported_matrix(cycle_graph(6), seed=3)
        assert check_ncc(a).satisfied
        sb = sign_vanishing_entries(a)
        assert np.array_equal(sb.signs, np.sign(eigensystem(a).vectors))
        assert sb.total == nodal_counts(a, eigensystem(a).vectors).total

    def test_degenerate(self):
        g = Graph(3, ((1, 2), (2, 3), (1, 3)))
        from nodalcount.spectral import SupportedMatrix

        with pytest.raises(DegenerateBase):
            sign_vanishing_entries(SupportedMatrix(g, g.adjacency_matrix()))


class TestSurvey:
    def test_predicate_against_eigensolver(self):
        a = cycle_graph(4).adjacency_matrix()
        d = _sample_cube_surface(np.random.default_rng(7), 300)
        pred = _preserves_sign_structure(d)
        for row, expected in zip(d, pred):
            w, v = np.linalg.eigh(a + 1e-4 * np.diag(row))
            near = np.argsort(np.abs(w))[:2]
            # null vectors of C_4 have the shape (x, y, -x, -y)
            ok = all(np.sign(v[2, k]) == -np.sign(v[0, k]) and np.sign(v[3, k]) == -np.sign(v[1, k]) for k in near)
            assert ok == expected

    def test_cube_surface(self):
        d = _sample_cube_surface(np.random.default_rng(0), 1000)
        assert np.allclose(np.abs(d).max(axis=1), 1.0)

    def test_deterministic(self):
        assert diag_perturbation_sign_survey(10_000, seed=4) == diag_perturbation_sign_survey(10_000, seed=4)

    def test_estimate(self):
        res = diag_perturbation_sign_survey(200_000, seed=1)
        assert abs(res.fraction - 5 / 18) < 0.01
        assert abs(res.complement - 13 / 18) < 0.01
        assert res.rejected == 0

    def test_exact(self):
        assert c4_exact_fraction() == pytest.approx(5 / 18, abs=1e-12)
