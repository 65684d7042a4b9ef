import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from nodalcount.constructions import dense_block_matrix
from nodalcount.estimators import MagneticMorse, NodalCounter, TransversalRepairer
from nodalcount.graph import complete_graph
from nodalcount.sampling import random_supported_matrix
from nodalcount.spectral import check_ncc


def test_params_roundtrip():
    est = NodalCounter(graph=complete_graph(3), tol_gap=1e-6)
    assert est.get_params()["tol_gap"] == 1e-6
    c = clone(est)
    assert c.get_params()["tol_gap"] == 1e-6 and c is not est


def test_nodal_counter():
    a = random_supported_matrix(complete_graph(4), seed=1)
    est = NodalCounter(graph=a.graph).fit(a.entries)
    assert est.total_ == est.report_.total and est.ncc_.satisfied
    assert est.surpluses().shape == (4,)


def test_unfitted():
    with pytest.raises(NotFittedError):
        NodalCounter().surpluses()


def test_magnetic():
    a = random_supported_matrix(complete_graph(4), seed=2)
    est = MagneticMorse(graph=a.graph, method="fd").fit(a)
    assert est.verdict_.passed and est.morse_indices_.shape == (4,)


def test_repairer():
    a, _ = dense_block_matrix(3, 1)
    rep = TransversalRepairer(graph=a.graph)
    out = rep.fit(a).transform(a)
    assert rep.verdict_.transversal
    assert out.shape == (3, 3)
    assert check_ncc(rep.result_.matrix).satisfied
    assert np.allclose(out, out.T)
