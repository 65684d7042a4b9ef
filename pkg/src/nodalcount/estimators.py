"""Thin scikit-learn style wrappers around the functional core.

The inputs here are single matrices on a fixed graph rather than sample
tables, so only ``get_params``/``set_params`` and the ``fit`` / ``transform``
protocol are honoured. ``fit`` takes the matrix entries as ``X``.
"""

from __future__ import annotations

from typing import Optional

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .config import TOL_GAP, TOL_ZERO
from .graph import Graph, spanning_frame
from .magnetic import hessian_stack, morse_verify
from .spectral import GENERAL, SupportedMatrix, check_ncc, eigensystem, nodal_counts
from .transversality import SupportSubspace, check_transversality, transversal_repair


def _as_supported(graph: Graph, X, mode: str) -> SupportedMatrix:
    if isinstance(X, SupportedMatrix):
        return X
    return SupportedMatrix(graph, np.asarray(X, dtype=float), mode)


class NodalCounter(BaseEstimator):
    """Eigen-decompose a matrix supported on ``graph`` and count nodal edges.

    Fitted attributes: ``eigenvalues_``, ``basis_``, ``ncc_``, ``report_``,
    ``total_``.
    """

    def __init__(self, graph: Optional[Graph] = None, mode: str = GENERAL,
                 tol_gap: float = TOL_GAP, tol_zero: float = TOL_ZERO):
        self.graph = graph
        self.mode = mode
        self.tol_gap = tol_gap
        self.tol_zero = tol_zero

    def fit(self, X, y=None):
        a = _as_supported(self.graph, X, self.mode)
        es = eigensystem(a, self.tol_zero)
        self.matrix_ = a
        self.eigenvalues_ = es.values
        self.basis_ = es.vectors
        self.ncc_ = check_ncc(a, es, self.tol_gap, self.tol_zero)
        self.report_ = nodal_counts(a, es.vectors, self.tol_zero)
        self.total_ = self.report_.total
        return self

    def surpluses(self) -> np.ndarray:
        check_is_fitted(self, "report_")
        return np.array(self.report_.surpluses)


class MagneticMorse(BaseEstimator):
    """Magnetic Hessians at zero flux and their Morse indices.

    Args:
        graph: support graph.
        method: ``"pert"`` or ``"fd"``.
        fd_step: finite-difference step; ``None`` picks it from the gap.
    """

    def __init__(self, graph: Optional[Graph] = None, mode: str = GENERAL, method: str = "pert",
                 fd_step: Optional[float] = None, tol_zero: float = TOL_ZERO):
        self.graph = graph
        self.mode = mode
        self.method = method
        self.fd_step = fd_step
        self.tol_zero = tol_zero

    def fit(self, X, y=None):
        a = _as_supported(self.graph, X, self.mode)
        es = eigensystem(a, self.tol_zero)
        frame = spanning_frame(a.graph)
        self.stack_ = hessian_stack(a, es, frame, self.method, h=self.fd_step)
        self.morse_indices_ = np.array(self.stack_.morse_indices, dtype=int)
        report = nodal_counts(a, es.vectors, self.tol_zero)
        self.verdict_ = morse_verify(a, es, frame, report, stack=self.stack_)
        return self


class TransversalRepairer(TransformerMixin, BaseEstimator):
    """Repair a matrix with repeated eigenvalues into a nearby NCC matrix.

    ``fit`` records the transversality verdict; ``transform`` returns the
    repaired entries.
    """

    def __init__(self, graph: Optional[Graph] = None, space: str = "sg", mode: str = GENERAL,
                 target_gap: Optional[float] = None, max_iter: int = 50, seed: int = 0,
                 tol_gap: float = TOL_GAP, tol_zero: float = TOL_ZERO):
        self.graph = graph
        self.space = space
        self.mode = mode
        self.target_gap = target_gap
        self.max_iter = max_iter
        self.seed = seed
        self.tol_gap = tol_gap
        self.tol_zero = tol_zero

    def fit(self, X, y=None):
        a = _as_supported(self.graph, X, self.mode)
        self.subspace_ = SupportSubspace(self.space, a.graph)
        self.verdict_ = check_transversality(a, self.subspace_, self.tol_gap)
        return self

    def transform(self, X):
        check_is_fitted(self, "subspace_")
        a = _as_supported(self.graph, X, self.mode)
        self.result_ = transversal_repair(a, w=self.subspace_, target_gap=self.target_gap, max_iter=self.max_iter,
                                          tol_gap=self.tol_gap, tol_zero=self.tol_zero, seed=self.seed)
        return self.result_.matrix.entries
