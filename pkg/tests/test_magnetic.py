import numpy as np
import pytest

from nodalcount.constructions import construct_dense_extremizer
from nodalcount.exceptions import DimensionMismatch, GapTooSmall
from nodalcount.graph import complete_graph, cycle_graph, path_graph, spanning_frame
from nodalcount.magnetic import (
    MagneticFrame,
    hessian_fd,
    hessian_perturbative,
    hessian_stack,
    hessians_fd,
    hessians_perturbative,
    magnetic_eigenvalues,
    magnetic_matrix,
    morse_verify,
)
from nodalcount.sampling import random_supported_matrix
from nodalcount.spectral import SupportedMatrix, eigensystem, nodal_counts


def _complex_hessian(a, frame, k, h=1e-3):
    """Central differences of eigvalsh on the complex Hermitian matrix (independent of the embedding)."""
    beta = frame.beta
    lam = lambda t: np.linalg.eigvalsh(magnetic_matrix(a.entries, frame, t))[k]
    out = np.zeros((beta, beta))
    eye = np.eye(beta)
    for l in range(beta):
        for m in range(beta):
            out[l, m] = (lam(h * (eye[l] + eye[m])) - lam(h * (eye[l] - eye[m]))
                         - lam(h * (eye[m] - eye[l])) + lam(-h * (eye[l] + eye[m]))) / (4 * h * h)
    return out


class TestMagneticEigenvalues:
    def test_zero_flux(self):
        a = random_supported_matrix(complete_graph(4), seed=2)
        fr = spanning_frame(a.graph)
        mf = MagneticFrame(a, fr, np.zeros(fr.beta))
        assert np.allclose(magnetic_eigenvalues(mf), eigensystem(a).values)

    def test_tree(self):
        a = random_supported_matrix(path_graph(4), seed=1)
        mf = MagneticFrame(a, spanning_frame(a.graph), [])
        assert np.allclose(magnetic_eigenvalues(mf), eigensystem(a).values)

    def test_signed_triangle(self):
        g = cycle_graph(3)
        a = SupportedMatrix(g, -g.adjacency_matrix())
        mf = MagneticFrame(a, spanning_frame(g), [np.pi])
        direct = np.linalg.eigvalsh(mf.hermitian())
        assert np.allclose(magnetic_eigenvalues(mf), direct)
        # flux pi flips the cycle sign, which is gauge equivalent to +adjacency
        assert np.allclose(direct, np.linalg.eigvalsh(g.adjacency_matrix()))

    def test_theta_length(self):
        a = random_supported_matrix(cycle_graph(4), seed=0)
        with pytest.raises(DimensionMismatch):
            MagneticFrame(a, spanning_frame(a.graph), [0.1, 0.2])


class TestHessians:
    def test_tree_empty(self):
        a = random_supported_matrix(path_graph(5), seed=3)
        fr = spanning_frame(a.graph)
        assert hessian_fd(a, fr, 1).shape == (0, 0)
        assert hessian_perturbative(a, eigensystem(a), fr, 1).shape == (0, 0)

    @pytest.mark.parametrize("seed", range(5))
    def test_perturbative_matches_complex_fd(self, seed):
        a = random_supported_matrix(complete_graph(4), seed=seed)
        fr = spanning_frame(a.graph)
        hp = hessians_perturbative(a, eigensystem(a), fr)
        for k in range(4):
            ref = _complex_hessian(a, fr, k)
            assert np.allclose(hp[k], ref, atol=1e-4 * (1 + np.abs(ref).max()))

    def test_fd_matches_perturbative(self):
        a = random_supported_matrix(complete_graph(5), seed=11)
        fr = spanning_frame(a.graph)
        hp = hessians_perturbative(a, eigensystem(a), fr)
        fd = hessians_fd(a, fr)
        for k in range(5):
            assert np.abs(hp[k] - fd.hessians[k]).max() <= max(1e-6, 1e-4 * np.linalg.norm(hp[k], 2))
        assert np.abs(fd.gradients).max() <= 1e-6 * a.norm

    def test_trace_zero(self):
        a = random_supported_matrix(complete_graph(6), seed=4)
        st = hessian_stack(a)
        assert st.trace_residual() <= 1e-8 * a.norm

    def test_dense_signs(self):
        r = construct_dense_extremizer(3, 1)
        a = r.matrix
        fr = spanning_frame(a.graph)
        fd = hessians_fd(a, fr)
        signs = tuple(int(np.sign(h[0, 0])) for h in fd.hessians)
        assert signs == (1, -1, 1)

    def test_gap_too_small(self):
        g = cycle_graph(4)
        a = SupportedMatrix(g, g.adjacency_matrix())
        with pytest.raises(GapTooSmall):
            hessians_fd(a)

    def test_explicit_step_not_adaptive(self):
        a = random_supported_matrix(complete_graph(4), seed=0)
        with pytest.raises(GapTooSmall):
            hessians_fd(a, h=10.0, adaptive=False)


class TestMorse:
    def test_tree(self):
        a = random_supported_matrix(path_graph(6), seed=8)
        es = eigensystem(a)
        v = morse_verify(a, es, spanning_frame(a.graph), nodal_counts(a, es.vectors))
        assert v.passed and v.morse_indices == (0,) * 6

    def test_dense(self):
        r = construct_dense_extremizer(3, 1)
        es = eigensystem(r.matrix)
        v = morse_verify(r.matrix, es, spanning_frame(r.matrix.graph), nodal_counts(r.matrix, es.vectors))
        assert v.morse_indices == (0, 1, 0) and v.passed

    def test_small_battery(self):
        for seed in range(20):
            a = random_supported_matrix(complete_graph(5), seed=seed)
            es = eigensystem(a)
            fr = spanning_frame(a.graph)
            fd_stack = hessian_stack(a, es, fr, "fd")
            v = morse_verify(a, es, fr, nodal_counts(a, es.vectors), stack=fd_stack)
            assert v.passed and v.index_sum_ok
