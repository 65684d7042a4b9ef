"""Nodal edge counts of eigenvectors of symmetric matrices supported on graphs."""

from .battery import verify_suite
from .config import Tolerances
from .constructions import construct_dense_extremizer
from .exceptions import NodalCountError, NumericalFailure, PreconditionFailed
from .graph import (
    Graph,
    betti,
    classify_determinantal,
    complete_graph,
    cycle_graph,
    load_graph,
    path_graph,
    spanning_frame,
    star_graph,
)
from .spectral import (
    GENERAL,
    ZERO_DIAGONAL,
    SupportedMatrix,
    check_ncc,
    eigensystem,
    load_matrix,
    nodal_counts,
    verify_surplus_bounds,
)

__version__ = "0.1.0"

__all__ = [
    "GENERAL",
    "ZERO_DIAGONAL",
    "Graph",
    "NodalCountError",
    "NumericalFailure",
    "PreconditionFailed",
    "SupportedMatrix",
    "Tolerances",
    "betti",
    "check_ncc",
    "classify_determinantal",
    "complete_graph",
    "construct_dense_extremizer",
    "cycle_graph",
    "eigensystem",
    "load_graph",
    "load_matrix",
    "nodal_counts",
    "path_graph",
    "spanning_frame",
    "star_graph",
    "verify_suite",
    "verify_surplus_bounds",
]
