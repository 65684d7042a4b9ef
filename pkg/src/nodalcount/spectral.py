"""Supported matrices, eigensystems, the nodal count condition and nodal counts."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property
from math import comb
from typing import Iterable, Optional, Sequence

import numpy as np

from ._linalg import spectral_norm, sym_eigh
from .config import TOL_DET, TOL_GAP, TOL_ZERO
from .exceptions import (
    DimensionMismatch,
    InvalidMatrix,
    ParseError,
    PreconditionFailed,
    SingularMatrix,
    WrongGraph,
)
from .graph import Graph, betti, bipartition, graph_from_dict

GENERAL = "general"
ZERO_DIAGONAL = "zero-diagonal"
MODES = (GENERAL, ZERO_DIAGONAL)


@dataclass(frozen=True, eq=False)
class SupportedMatrix:
    """Real symmetric matrix supported on a graph.

    ``entries`` is copied and made read-only. Non-edge entries must be exactly
    zero, as must the diagonal in zero-diagonal mode. Use :meth:`project` to
    build one from a matrix with round-off outside the support.
    """

    graph: Graph
    entries: np.ndarray
    mode: str = GENERAL

    def __post_init__(self):
        if self.mode not in MODES:
            raise InvalidMatrix(f"mode must be one of {MODES}, got {self.mode!r}")
        a = np.array(self.entries, dtype=float, copy=True)
        n = self.graph.n
        if a.shape != (n, n):
            raise DimensionMismatch(f"expected {n}x{n} entries, got shape {a.shape}")
        if not np.all(np.isfinite(a)):
            raise InvalidMatrix("entries must be finite")
        if not np.array_equal(a, a.T):
            raise InvalidMatrix("entries must be exactly symmetric")
        mask = self.graph.adjacency_matrix() > 0
        np.fill_diagonal(mask, True)
        if np.any(a[~mask] != 0):
            raise InvalidMatrix("nonzero entry outside the graph support")
        if self.mode == ZERO_DIAGONAL and np.any(np.diag(a) != 0):
            raise InvalidMatrix("zero-diagonal mode requires a zero diagonal")
        a.setflags(write=False)
        object.__setattr__(self, "entries", a)

    @classmethod
    def project(cls, graph: Graph, m: np.ndarray, mode: str = GENERAL) -> "SupportedMatrix":
        """Symmetrize ``m`` and zero every entry outside the support."""
        m = np.asarray(m, dtype=float)
        a = 0.5 * (m + m.T)
        mask = graph.adjacency_matrix() > 0
        if mode == GENERAL:
            np.fill_diagonal(mask, True)
        return cls(graph, np.where(mask, a, 0.0), mode)

    @property
    def n(self) -> int:
        return self.graph.n

    @cached_property
    def norm(self) -> float:
        return spectral_norm(self.entries)

    def edge_values(self) -> np.ndarray:
        return np.array([self.entries[i - 1, j - 1] for i, j in self.graph.edges])

    def __neg__(self) -> "SupportedMatrix":
        return SupportedMatrix(self.graph, -self.entries, self.mode)

    def to_dict(self) -> dict:
        return {"n": self.n, "mode": self.mode, "rows": self.entries.tolist()}


def matrix_from_dict(doc, graph: Graph) -> SupportedMatrix:
    if not isinstance(doc, dict) or "rows" not in doc:
        raise ParseError('matrix document needs field "rows"')
    mode = doc.get("mode", GENERAL)
    try:
        rows = np.array(doc["rows"], dtype=float)
    except (TypeError, ValueError) as exc:
        raise ParseError(f"rows must be a numeric matrix: {exc}") from exc
    if "n" in doc and doc["n"] != graph.n:
        raise DimensionMismatch(f"matrix n={doc['n']} but graph n={graph.n}")
    return SupportedMatrix(graph, rows, mode)


def load_matrix(text: str, graph: Graph) -> SupportedMatrix:
    """Parse matrix JSON ``{"n", "mode", "rows"}`` against ``graph``."""
    try:
        doc = json.loads(text)
    except (json.JSONDecodeError, TypeError) as exc:
        raise ParseError(f"malformed JSON: {exc}") from exc
    return matrix_from_dict(doc, graph)


def _entries(a) -> np.ndarray:
    return a.entries if isinstance(a, SupportedMatrix) else np.asarray(a, dtype=float)


# Eigensystems


@dataclass(frozen=True, eq=False)
class EigenSystem:
    """Ascending eigenvalues with orthonormal eigenvector columns."""

    values: np.ndarray
    vectors: np.ndarray

    @property
    def gaps(self) -> np.ndarray:
        return np.diff(self.values)

    @property
    def min_gap(self) -> float:
        return float(self.gaps.min()) if len(self.values) > 1 else float("inf")

    def vector(self, k: int) -> np.ndarray:
        """Eigenvector ``phi_k`` with 1-based ``k``."""
        return self.vectors[:, k - 1]

    def to_dict(self) -> dict:
        return {"values": self.values.tolist(), "vectors": self.vectors.T.tolist()}


def eigensystem(a, tol_zero: float = TOL_ZERO) -> EigenSystem:
    """Full ordered eigensystem.

    Each eigenvector is flipped so its first entry above ``tol_zero`` in
    magnitude is positive.
    """
    w, v = sym_eigh(_entries(a), tol_zero)
    w.setflags(write=False)
    v.setflags(write=False)
    return EigenSystem(w, v)


@dataclass(frozen=True)
class NccReport:
    strictly_supported: bool
    offending_edges: tuple
    simple_spectrum: bool
    min_gap: float
    nonvanishing: bool
    vanishing_entries: tuple  # 1-based (k, i)
    min_entry: float

    @property
    def satisfied(self) -> bool:
        return self.strictly_supported and self.simple_spectrum and self.nonvanishing

    def to_dict(self) -> dict:
        return {
            "satisfied": self.satisfied,
            "strictly_supported": self.strictly_supported,
            "offending_edges": [list(e) for e in self.offending_edges],
            "simple_spectrum": self.simple_spectrum,
            "min_gap": _finite_or_none(self.min_gap),
            "nonvanishing": self.nonvanishing,
            "vanishing_entries": [list(p) for p in self.vanishing_entries],
            "min_entry": self.min_entry,
        }


def _finite_or_none(x: float):
    return float(x) if np.isfinite(x) else None


def check_ncc(
    a: SupportedMatrix,
    es: Optional[EigenSystem] = None,
    tol_gap: float = TOL_GAP,
    tol_zero: float = TOL_ZERO,
) -> NccReport:
    """Evaluate the nodal count condition with relative tolerances."""
    if es is None:
        es = eigensystem(a, tol_zero)
    scale = 1.0 + a.norm
    offending = tuple(e for e in a.graph.edges if a.entries[e[0] - 1, e[1] - 1] == 0)
    min_gap = es.min_gap
    mags = np.abs(es.vectors)
    thr = tol_zero * scale
    bad = np.argwhere(mags <= thr)
    vanishing = tuple(sorted((int(k) + 1, int(i) + 1) for i, k in bad))
    return NccReport(
        strictly_supported=not offending,
        offending_edges=offending,
        simple_spectrum=bool(min_gap > tol_gap * scale),
        min_gap=min_gap,
        nonvanishing=not vanishing,
        vanishing_entries=vanishing,
        min_entry=float(mags.min()) if mags.size else float("inf"),
    )


# Nodal counts


@dataclass(frozen=True)
class NodalReport:
    strong_counts: tuple[int, ...]
    weak_counts: tuple[int, ...]
    per_edge: dict  # (i, j) -> count
    n_edges: int

    @property
    def n(self) -> int:
        return len(self.strong_counts)

    @property
    def surpluses(self) -> tuple[int, ...]:
        return tuple(nu - k for k, nu in enumerate(self.strong_counts))

    @property
    def total(self) -> int:
        return sum(self.strong_counts)

    @property
    def weak_total(self) -> int:
        return sum(self.weak_counts)

    @property
    def average(self) -> float:
        return self.total / self.n

    @property
    def average_surplus(self) -> float:
        return sum(self.surpluses) / self.n

    def to_dict(self) -> dict:
        return {
            "strong_counts": list(self.strong_counts),
            "weak_counts": list(self.weak_counts),
            "surpluses": list(self.surpluses),
            "per_edge": {f"{i}-{j}": c for (i, j), c in self.per_edge.items()},
            "total": self.total,
            "weak_total": self.weak_total,
            "average": self.average,
            "average_surplus": self.average_surplus,
        }


def edge_products(a, basis: np.ndarray, graph: Graph) -> np.ndarray:
    """Array of ``A_ij phi_k(i) phi_k(j)`` with shape (n_edges, n_vectors)."""
    entries = _entries(a)
    idx = np.array(graph.edges, dtype=int).reshape(-1, 2) - 1
    w = entries[idx[:, 0], idx[:, 1]]
    return w[:, None] * basis[idx[:, 0], :] * basis[idx[:, 1], :]


def nodal_counts(a: SupportedMatrix, basis, tol_zero: float = TOL_ZERO) -> NodalReport:
    """Strong and weak nodal edge counts of each basis vector.

    An entry ``phi(i)`` is treated as zero when ``|phi(i)| <= tol_zero * (1 + ||A||) * max|phi|``,
    the same test used for the nonvanishing part of the nodal count
    condition. An edge is strong when ``A_ij phi(i) phi(j) > 0`` with both
    entries nonzero, and weak when the product is ``>= 0`` after zeroing.

    Args:
        a: supported matrix.
        basis: vectors as the columns of an ``n x m`` array.
        tol_zero: relative entry threshold.

    Returns:
        NodalReport with the basis order defining ``k``.
    """
    basis = np.asarray(basis, dtype=float)
    if basis.ndim != 2 or basis.shape[0] != a.n:
        raise DimensionMismatch(f"basis must have {a.n} rows, got shape {basis.shape}")
    thr = tol_zero * (1.0 + a.norm) * np.abs(basis).max(axis=0)
    signs = np.where(np.abs(basis) > thr[None, :], np.sign(basis), 0.0)
    prods = edge_products(a, signs, a.graph)
    strong = prods > 0
    weak = prods >= 0
    per_edge = {e: int(c) for e, c in zip(a.graph.edges, strong.sum(axis=1))}
    return NodalReport(
        strong_counts=tuple(int(c) for c in strong.sum(axis=0)),
        weak_counts=tuple(int(c) for c in weak.sum(axis=0)),
        per_edge=per_edge,
        n_edges=a.graph.n_edges,
    )


@dataclass(frozen=True)
class BoundsVerdict:
    per_k_violations: tuple  # (k, sigma_k) pairs, 1-based k
    lower_margin: int  # sum(sigma) - beta
    upper_margin: int  # beta (n - 1) - sum(sigma)
    negated_total: int

    @property
    def per_k_ok(self) -> bool:
        return not self.per_k_violations

    @property
    def lower_ok(self) -> bool:
        return self.lower_margin >= 0

    @property
    def upper_ok(self) -> bool:
        return self.upper_margin >= 0

    @property
    def lower_tight(self) -> bool:
        return self.lower_margin == 0

    @property
    def passed(self) -> bool:
        return self.per_k_ok and self.lower_ok and self.upper_ok

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "per_k_ok": self.per_k_ok,
            "per_k_violations": [list(v) for v in self.per_k_violations],
            "lower_ok": self.lower_ok,
            "upper_ok": self.upper_ok,
            "lower_margin": self.lower_margin,
            "upper_margin": self.upper_margin,
            "negated_total": self.negated_total,
        }


def verify_surplus_bounds(report: NodalReport, beta: int, n: int) -> BoundsVerdict:
    """Check ``0 <= sigma_k <= beta`` and ``beta <= sum(sigma) <= beta (n - 1)``.

    Averages are compared after multiplying through by ``n`` so the test is
    exact integer arithmetic.
    """
    if report.n != n:
        raise DimensionMismatch(f"report has {report.n} vectors, expected {n}")
    sig = report.surpluses
    violations = tuple((k + 1, s) for k, s in enumerate(sig) if s < 0 or s > beta)
    total_sigma = sum(sig)
    return BoundsVerdict(
        per_k_violations=violations,
        lower_margin=total_sigma - beta,
        upper_margin=beta * (n - 1) - total_sigma,
        negated_total=n * report.n_edges - report.total,
    )


def lower_bound_total(n: int, beta: int) -> int:
    return comb(n, 2) + beta


def upper_bound_total(n: int, beta: int) -> int:
    return comb(n, 2) + beta * (n - 1)


# Bipartite and inverse-pattern checks


@dataclass(frozen=True)
class BipartiteVerdict:
    per_edge: dict
    expected: float
    symmetry_error: float
    average: float
    expected_average: float
    symmetry_ok: bool

    @property
    def per_edge_ok(self) -> bool:
        return all(2 * c == round(2 * self.expected) for c in self.per_edge.values())

    @property
    def passed(self) -> bool:
        return self.per_edge_ok and self.symmetry_ok and abs(self.average - self.expected_average) < 1e-12

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "per_edge": {f"{i}-{j}": c for (i, j), c in self.per_edge.items()},
            "expected": self.expected,
            "average": self.average,
            "expected_average": self.expected_average,
            "symmetry_error": self.symmetry_error,
        }


def bipartite_edge_check(
    a: SupportedMatrix,
    es: Optional[EigenSystem] = None,
    tol_gap: float = TOL_GAP,
    tol_zero: float = TOL_ZERO,
) -> BipartiteVerdict:
    """Every edge of a zero-diagonal bipartite NCC matrix carries ``n/2`` sign changes."""
    if a.mode != ZERO_DIAGONAL:
        raise PreconditionFailed("matrix must be zero-diagonal")
    if bipartition(a.graph) is None:
        raise PreconditionFailed("graph is not bipartite")
    if es is None:
        es = eigensystem(a, tol_zero)
    ncc = check_ncc(a, es, tol_gap, tol_zero)
    if not ncc.satisfied:
        raise PreconditionFailed("nodal count condition fails")
    report = nodal_counts(a, es.vectors, tol_zero)
    sym_err = float(np.abs(es.values + es.values[::-1]).max())
    n, beta = a.n, betti(a.graph)
    return BipartiteVerdict(
        per_edge=report.per_edge,
        expected=n / 2,
        symmetry_error=sym_err,
        average=report.average,
        expected_average=(n - 1) / 2 + beta / 2,
        symmetry_ok=sym_err <= 1e-10 * (1 + a.norm),
    )


def _is_standard_path(g: Graph) -> bool:
    return g.edges == tuple((i, i + 1) for i in range(1, g.n))


@dataclass(frozen=True)
class PatternVerdict:
    inverse: np.ndarray
    mismatches: tuple  # 1-based (i, j) with i >= j
    threshold: float

    @property
    def passed(self) -> bool:
        return not self.mismatches

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "mismatches": [list(m) for m in self.mismatches],
            "threshold": self.threshold,
            "inverse": self.inverse.tolist(),
        }


def tridiagonal_inverse_pattern(
    a: SupportedMatrix, tol_zero: float = TOL_ZERO, tol_det: float = TOL_DET
) -> PatternVerdict:
    """Check the zero pattern of the inverse of a zero-diagonal path matrix on ``P_{2n}``.

    For ``i >= j`` the entry ``(A^{-1})_{ij}`` must be nonzero exactly when
    ``i`` is even and ``j`` is odd.
    """
    g = a.graph
    if not _is_standard_path(g) or g.n % 2:
        raise WrongGraph("requires the path 1-2-...-2n with an even vertex count")
    if a.mode != ZERO_DIAGONAL:
        raise PreconditionFailed("matrix must be zero-diagonal")
    if any(a.entries[i - 1, j - 1] == 0 for i, j in g.edges):
        raise PreconditionFailed("matrix is not strictly supported")
    sign, logdet = np.linalg.slogdet(a.entries)
    if sign == 0 or logdet <= np.log(tol_det) + a.n * np.log(max(a.norm, 1e-300)):
        raise SingularMatrix("determinant below threshold")
    inv = np.linalg.inv(a.entries)
    thr = tol_zero * spectral_norm(inv)
    mismatches = []
    for i in range(1, a.n + 1):
        for j in range(1, i + 1):
            expect = i % 2 == 0 and j % 2 == 1
            if (abs(inv[i - 1, j - 1]) > thr) != expect:
                mismatches.append((i, j))
    return PatternVerdict(inv, tuple(mismatches), thr)


@dataclass(frozen=True)
class ShiftVerdict:
    shift: float
    status: str  # "dense", "sparse" or "at-eigenvalue"
    min_ratio: Optional[float]  # min |entry| / max |entry| of the resolvent

    @property
    def dense(self) -> bool:
        return self.status == "dense"

    def to_dict(self) -> dict:
        return {"shift": self.shift, "status": self.status, "min_ratio": self.min_ratio}


def resolvent_density(
    entries: np.ndarray, shifts: Iterable[float], tol_zero: float = TOL_ZERO, tol_shift: float = 1e-8
) -> list[ShiftVerdict]:
    """Whether ``(A - lambda I)^{-1}`` is entrywise nonzero for each shift (no sign requirement)."""
    entries = np.asarray(entries, dtype=float)
    w = np.linalg.eigvalsh(entries)
    scale = 1.0 + spectral_norm(entries)
    out = []
    for lam in shifts:
        lam = float(lam)
        if np.min(np.abs(w - lam)) <= tol_shift * scale:
            out.append(ShiftVerdict(lam, "at-eigenvalue", None))
            continue
        r = np.abs(np.linalg.inv(entries - lam * np.eye(len(w))))
        ratio = float(r.min() / r.max())
        out.append(ShiftVerdict(lam, "dense" if ratio > tol_zero else "sparse", ratio))
    return out


def resolvent_density_check(
    a: SupportedMatrix, shifts: Sequence[float], tol_zero: float = TOL_ZERO, tol_shift: float = 1e-8
) -> list[ShiftVerdict]:
    """Resolvent density for a non-negative strictly supported matrix.

    Shifts within ``tol_shift`` of an eigenvalue are flagged ``at-eigenvalue``
    and skipped.
    """
    if np.any(a.entries < 0):
        raise PreconditionFailed("matrix must be entrywise non-negative")
    if any(a.entries[i - 1, j - 1] == 0 for i, j in a.graph.edges):
        raise PreconditionFailed("matrix is not strictly supported")
    return resolvent_density(a.entries, shifts, tol_zero, tol_shift)
