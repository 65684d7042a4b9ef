"""Orbit tangent spaces, the transversality test and the Newton repair iteration."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional

import numpy as np

from ._linalg import cluster_values, spectral_norm
from .config import TOL_GAP, TOL_ZERO
from .exceptions import (
    AmbiguousClustering,
    InvalidMatrix,
    NewtonStalled,
    NotAnEigenvector,
    PreconditionFailed,
    RepairFailed,
    VanishingEntry,
)
from .graph import Graph, betti
from .spectral import GENERAL, ZERO_DIAGONAL, SupportedMatrix, nodal_counts

SG = "S(G)"
S0G = "S0(G)"
_KIND_ALIASES = {"sg": SG, "s": SG, SG: SG, "s0g": S0G, "s0": S0G, S0G: S0G}

REPAIR_RESIDUAL = 1e-12
AMBIGUITY_MARGIN = 100.0


def antisymmetric_basis(n: int) -> np.ndarray:
    """Orthonormal basis ``(E_ij - E_ji)/sqrt 2``, ``i < j``, as an array of shape ``(C(n,2), n, n)``."""
    iu, ju = np.triu_indices(n, 1)
    basis = np.zeros((len(iu), n, n))
    q = np.arange(len(iu))
    basis[q, iu, ju] = 1 / math.sqrt(2)
    basis[q, ju, iu] = -1 / math.sqrt(2)
    return basis


def _commutators(a: np.ndarray, xs: np.ndarray) -> np.ndarray:
    return np.einsum("ij,qjk->qik", a, xs) - np.einsum("qij,jk->qik", xs, a)


@dataclass(frozen=True)
class SupportSubspace:
    """The space ``S(G)`` (support plus diagonal) or ``S0(G)`` (support, zero diagonal)."""

    kind: str
    graph: Graph

    def __post_init__(self):
        kind = _KIND_ALIASES.get(self.kind, _KIND_ALIASES.get(str(self.kind).lower()))
        if kind is None:
            raise ValueError(f"unknown subspace kind {self.kind!r}")
        object.__setattr__(self, "kind", kind)

    @classmethod
    def for_matrix(cls, a: SupportedMatrix) -> "SupportSubspace":
        return cls(S0G if a.mode == ZERO_DIAGONAL else SG, a.graph)

    @property
    def dimension(self) -> int:
        return self.graph.n_edges + (self.graph.n if self.kind == SG else 0)

    @cached_property
    def complement_positions(self) -> tuple:
        """0-based ``(i, j)`` with ``i <= j`` spanning the orthogonal complement."""
        n, edges = self.graph.n, self.graph.edge_set
        pos = [(i, j) for i in range(n) for j in range(i + 1, n) if (i + 1, j + 1) not in edges]
        if self.kind == S0G:
            pos += [(i, i) for i in range(n)]
        return tuple(pos)

    def complement_basis(self) -> np.ndarray:
        n = self.graph.n
        basis = np.zeros((len(self.complement_positions), n, n))
        for q, (i, j) in enumerate(self.complement_positions):
            if i == j:
                basis[q, i, i] = 1.0
            else:
                basis[q, i, j] = basis[q, j, i] = 1 / math.sqrt(2)
        return basis

    def residual(self, m: np.ndarray) -> np.ndarray:
        """Coordinates of the component of ``m`` outside the subspace."""
        idx = np.array(self.complement_positions, dtype=int).reshape(-1, 2)
        vals = m[idx[:, 0], idx[:, 1]]
        return np.where(idx[:, 0] == idx[:, 1], vals, math.sqrt(2) * vals)

    def project(self, m: np.ndarray) -> np.ndarray:
        out = np.array(m, dtype=float, copy=True)
        for i, j in self.complement_positions:
            out[i, j] = out[j, i] = 0.0
        return out

    def contains(self, m: np.ndarray, tol: float = 0.0) -> bool:
        r = self.residual(np.asarray(m, dtype=float))
        return bool(r.size == 0 or np.abs(r).max() <= tol)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "dimension": self.dimension, "graph": self.graph.to_dict()}


@dataclass(frozen=True, eq=False)
class ConjugatedSubspace:
    """``o W o^T`` for a support subspace ``W`` and orthogonal ``o``."""

    base: SupportSubspace
    rotation: np.ndarray

    @property
    def dimension(self) -> int:
        return self.base.dimension

    def complement_basis(self) -> np.ndarray:
        o = self.rotation
        return np.einsum("ij,qjk,lk->qil", o, self.base.complement_basis(), o)


@dataclass(frozen=True)
class MultiplicityProfile:
    """Eigenvalue clusters and their multiplicities, in ascending order."""

    multiplicities: tuple
    values: tuple = ()

    def __post_init__(self):
        if not self.multiplicities or any(int(m) < 1 for m in self.multiplicities):
            raise ValueError("multiplicities must be positive integers")
        object.__setattr__(self, "multiplicities", tuple(int(m) for m in self.multiplicities))

    @property
    def r(self) -> int:
        return len(self.multiplicities)

    @property
    def n(self) -> int:
        return sum(self.multiplicities)

    @property
    def floor(self) -> int:
        return sum(math.comb(m, 2) for m in self.multiplicities)

    @property
    def commutator_dim(self) -> int:
        return math.comb(self.n, 2) - self.floor

    def to_dict(self) -> dict:
        return {"multiplicities": list(self.multiplicities), "values": list(self.values), "r": self.r}


def _profile(values: np.ndarray, tol: float) -> MultiplicityProfile:
    groups = cluster_values(values, tol)
    return MultiplicityProfile(tuple(len(g) for g in groups), tuple(float(values[g].mean()) for g in groups))


def multiplicity_profile(a, tol_gap: float = TOL_GAP, margin: float = AMBIGUITY_MARGIN) -> MultiplicityProfile:
    """Cluster eigenvalues within ``tol_gap (1 + ||A||)``.

    Raises:
        AmbiguousClustering: if some gap lies within a factor ``margin`` of the
            threshold, so that clustering at ``tol/margin`` and ``tol*margin``
            disagree. Both candidate profiles are attached.
    """
    a = a.entries if isinstance(a, SupportedMatrix) else np.asarray(a, dtype=float)
    values = np.linalg.eigvalsh(a)
    tol = tol_gap * (1.0 + spectral_norm(a))
    fine, coarse = _profile(values, tol / margin), _profile(values, tol * margin)
    if fine.multiplicities != coarse.multiplicities:
        raise AmbiguousClustering(
            f"eigenvalue gaps are within a factor {margin:g} of the clustering threshold {tol:.2e}",
            profiles=[fine.to_dict(), coarse.to_dict()],
        )
    return _profile(values, tol)


def commutator_space_dim(a, tol: float = TOL_GAP) -> int:
    """Dimension of ``{AX - XA : X antisymmetric}``.

    Computed as the numerical rank of the commutator map (singular values
    above ``tol (1 + ||A||)``) and cross-checked against
    ``C(n,2) - sum C(m_i,2)`` from the clustered spectrum.

    Raises:
        AmbiguousClustering: if the rank and the closed formula disagree, or the
            clustering itself is ambiguous.
    """
    a = a.entries if isinstance(a, SupportedMatrix) else np.asarray(a, dtype=float)
    n = len(a)
    if n < 2:
        return 0
    profile = multiplicity_profile(a, tol)
    comm = _commutators(a, antisymmetric_basis(n)).reshape(-1, n * n)
    sv = np.linalg.svd(comm, compute_uv=False)
    # each symmetric commutator has norm sqrt 2 times its singular direction
    rank = int(np.sum(sv / math.sqrt(2) > tol * (1.0 + spectral_norm(a))))
    if rank != profile.commutator_dim:
        raise AmbiguousClustering(
            f"numerical rank {rank} disagrees with closed formula {profile.commutator_dim}",
            profiles=[profile.to_dict()],
        )
    return rank


@dataclass(frozen=True)
class TransversalityVerdict:
    transversal: bool
    rank: int
    target: int
    smallest_singular: float

    @property
    def deficiency(self) -> int:
        return self.target - self.rank

    def to_dict(self) -> dict:
        return {"transversal": self.transversal, "rank": self.rank, "target": self.target,
                "deficiency": self.deficiency, "smallest_singular": self.smallest_singular}


def transversality_jacobian(a: np.ndarray, complement: np.ndarray) -> np.ndarray:
    """Matrix of ``X -> Proj_{W^perp}(AX - XA)`` in orthonormal bases."""
    n = len(a)
    comm = _commutators(a, antisymmetric_basis(n)).reshape(-1, n * n)
    return complement.reshape(len(complement), -1) @ comm.T


def check_transversality(a, w, tol: float = TOL_GAP) -> TransversalityVerdict:
    """Test ``W + {AX - XA} = S(n)``.

    Commutators are trace-free, so when the identity lies in ``W^perp`` (as
    for ``S0(G)``) the target rank is ``dim W^perp - 1``: transversality is
    tested inside the trace-zero space.
    """
    a = a.entries if isinstance(a, SupportedMatrix) else np.asarray(a, dtype=float)
    n = len(a)
    comp = w.complement_basis()
    d = len(comp)
    if d == 0:
        return TransversalityVerdict(True, 0, 0, math.inf)
    flat = comp.reshape(d, -1)
    ident = np.eye(n).ravel() / math.sqrt(n)
    trace_in_complement = d > 0 and abs(np.linalg.norm(flat @ ident) - 1.0) < 1e-9
    target = d - int(trace_in_complement)
    if target == 0:
        return TransversalityVerdict(True, 0, 0, math.inf)
    sv = np.linalg.svd(transversality_jacobian(a, comp), compute_uv=False)
    rank = int(np.sum(sv > tol * (1.0 + spectral_norm(a))))
    smallest = float(sv[target - 1]) if len(sv) >= target else 0.0
    return TransversalityVerdict(rank >= target, rank, target, smallest)


def spread_eigenvalues(values: np.ndarray, target_gap: float, tol: float) -> np.ndarray:
    """Split each cluster symmetrically about its mean with spacing ``target_gap``.

    Cluster means (hence the trace) are preserved.
    """
    out = np.array(values, dtype=float, copy=True)
    for group in cluster_values(out, tol):
        m = len(group)
        if m > 1:
            centre = out[group].mean()
            out[group] = centre + (np.arange(m) - (m - 1) / 2) * target_gap
    if len(out) > 1 and np.diff(out).min() < target_gap * (1 - 1e-9):
        raise RepairFailed("spread eigenvalues collide with a neighbouring cluster; use a smaller target_gap", [])
    return out


def nonvanishing_eigenbasis(a, seed: int = 0, tries: int = 64, tol_gap: float = TOL_GAP,
                            tol_zero: float = TOL_ZERO) -> np.ndarray:
    """An orthonormal eigenbasis with no small entries, rotating repeated eigenspaces at random.

    Raises:
        VanishingEntry: if no such basis is found within ``tries`` draws.
    """
    a = a.entries if isinstance(a, SupportedMatrix) else np.asarray(a, dtype=float)
    w, v = np.linalg.eigh(a)
    scale = 1.0 + spectral_norm(a)
    groups = cluster_values(w, tol_gap * scale)
    rng = np.random.default_rng(seed)
    thr = max(tol_zero * scale, 1e-6)
    for attempt in range(tries):
        basis = v.copy()
        if attempt:
            for g in groups:
                if len(g) > 1:
                    q, _ = np.linalg.qr(rng.standard_normal((len(g), len(g))))
                    basis[:, g] = v[:, g] @ q
        if np.abs(basis).min() > thr:
            return basis
    raise VanishingEntry(f"no nowhere-vanishing eigenbasis found in {tries} draws")


def cayley(x: np.ndarray) -> np.ndarray:
    """Orthogonal matrix ``(I - X/2)^{-1} (I + X/2)`` for antisymmetric ``X``."""
    eye = np.eye(len(x))
    return np.linalg.solve(eye - x / 2, eye + x / 2)


@dataclass(frozen=True, eq=False)
class RepairResult:
    matrix: SupportedMatrix
    basis: np.ndarray
    eigenvalues: np.ndarray
    rotation: np.ndarray
    trace: tuple
    distance: float

    @property
    def iterations(self) -> int:
        return len(self.trace) - 1

    def to_dict(self) -> dict:
        return {
            "matrix": self.matrix.to_dict(),
            "basis": self.basis.T.tolist(),
            "eigenvalues": self.eigenvalues.tolist(),
            "trace": list(self.trace),
            "distance": self.distance,
        }


def transversal_repair(
    a: SupportedMatrix,
    basis: Optional[np.ndarray] = None,
    w: Optional[SupportSubspace] = None,
    target_gap: Optional[float] = None,
    max_iter: int = 50,
    tol_gap: float = TOL_GAP,
    tol_zero: float = TOL_ZERO,
    seed: int = 0,
) -> RepairResult:
    """Move ``a`` to a nearby NCC matrix in ``W`` keeping the sign pattern of ``basis``.

    The eigenvalues are split to ``D'`` (spacing ``target_gap``), and an
    orthogonal ``o`` with ``o V D' V^T o^T`` in ``W`` is found by Newton's
    method on the linearized off-``W`` residual, retracting with a Cayley map.

    Args:
        a: matrix in ``W``.
        basis: orthonormal eigenbasis of ``a`` (columns in ascending order); a
            random nowhere-vanishing one is chosen when omitted.
        w: target space, defaulting to the one matching ``a.mode``.
        target_gap: eigenvalue spacing, default ``1e-6 ||A||``.

    Returns:
        RepairResult with ``A'``, ``V' = o V``, the residual history and ``||A' - A||``.

    Raises:
        PreconditionFailed: if ``a`` is not transversal to ``W``.
        NewtonStalled: if the residual stops decreasing.
        RepairFailed: if a sign of ``V`` or of an edge entry changes.
    """
    w = w or SupportSubspace.for_matrix(a)
    entries = a.entries
    norm = a.norm
    if basis is None:
        basis = nonvanishing_eigenbasis(a, seed, tol_gap=tol_gap, tol_zero=tol_zero)
    v = np.asarray(basis, dtype=float)
    d = np.einsum("ik,ij,jk->k", v, entries, v)
    if np.linalg.norm(entries @ v - v * d) > 1e-8 * (1.0 + norm):
        raise NotAnEigenvector("basis columns are not eigenvectors of the matrix")
    if np.abs(v).min() <= tol_zero * (1.0 + norm):
        raise VanishingEntry("basis has a vanishing entry")
    if not check_transversality(entries, w, tol_gap).transversal:
        raise PreconditionFailed("matrix does not satisfy the transversality condition")
    order = np.argsort(d, kind="stable")
    v, d = v[:, order], d[order]
    target_gap = 1e-6 * norm if target_gap is None else float(target_gap)
    d_new = spread_eigenvalues(d, target_gap, tol_gap * (1.0 + norm))

    n = a.n
    comp = w.complement_basis()
    m = (v * d_new) @ v.T
    m = (m + m.T) / 2
    o = np.eye(n)
    goal = REPAIR_RESIDUAL * max(norm, 1.0)
    trace = []
    best, stalls = math.inf, 0
    for _ in range(max_iter + 1):
        r = w.residual(m)
        res = float(np.abs(r).max()) if r.size else 0.0
        trace.append(res)
        if res <= goal:
            break
        if res < 0.5 * best:
            stalls = 0
        else:
            stalls += 1
            if stalls >= 3:
                raise NewtonStalled(f"residual stalled at {res:.2e}", tuple(trace))
        best = min(best, res)
        # Q M Q^T with Q ~ I + X moves M by XM - MX, the negative of the Jacobian image
        jac = transversality_jacobian(m, comp)
        x, *_ = np.linalg.lstsq(jac, r, rcond=None)
        xs = np.einsum("q,qij->ij", x, antisymmetric_basis(n))
        step = cayley(xs)
        m = step @ m @ step.T
        m = (m + m.T) / 2
        o = step @ o
    else:
        raise NewtonStalled(f"no convergence in {max_iter} iterations", tuple(trace))

    new = w.project(m)
    if w.kind == S0G:
        new[np.diag_indices(n)] = 0.0
    mode = ZERO_DIAGONAL if w.kind == S0G else GENERAL
    repaired = SupportedMatrix(a.graph, new, mode)
    v_new = o @ v
    if np.any(np.sign(v_new) != np.sign(v)):
        raise RepairFailed("eigenvector sign pattern changed during repair", tuple(trace))
    iu, ju = np.array([(i - 1, j - 1) for i, j in a.graph.edges]).T
    if np.any(np.sign(new[iu, ju]) != np.sign(entries[iu, ju])):
        raise RepairFailed("an edge entry changed sign during repair", tuple(trace))
    return RepairResult(repaired, v_new, d_new, o, tuple(trace), spectral_norm(new - entries))


@dataclass(frozen=True)
class FloorRecord:
    floor: int
    beta: int
    n_edges: Optional[int] = None

    @property
    def bounds_guaranteed(self) -> bool:
        return self.floor >= self.beta

    @property
    def transversality_possible(self) -> Optional[bool]:
        return None if self.n_edges is None else self.n_edges >= self.floor

    def to_dict(self) -> dict:
        return {"floor": self.floor, "beta": self.beta, "bounds_guaranteed": self.bounds_guaranteed,
                "transversality_possible": self.transversality_possible}


def multiplicity_surplus_floor(profile: MultiplicityProfile, beta: int, n_edges: Optional[int] = None) -> FloorRecord:
    """Total surplus floor ``sum C(m_i, 2)`` for any nowhere-vanishing eigenbasis.

    When ``n_edges`` is given, the record also carries the necessary condition
    ``|E| >= sum C(m_i, 2)`` for transversality with ``S(G)``.
    """
    if beta < 0:
        raise ValueError("beta must be non-negative")
    return FloorRecord(profile.floor, int(beta), n_edges)


@dataclass(frozen=True)
class LowerBoundVerdict:
    nodal: int
    counting: int
    multiplicity: int

    @property
    def holds(self) -> bool:
        return self.nodal >= self.counting - 1

    def to_dict(self) -> dict:
        return {"nodal": self.nodal, "counting": self.counting, "multiplicity": self.multiplicity,
                "holds": self.holds}


def check_multiplicity_lower_bound(a: SupportedMatrix, phi, lam: float, tol_gap: float = TOL_GAP,
                                   tol_zero: float = TOL_ZERO, tol_residual: float = 1e-8) -> LowerBoundVerdict:
    """Verify ``nu(A, phi) >= N(A, lambda) - 1`` for a nowhere-vanishing eigenvector.

    ``N(A, lambda)`` counts eigenvalues up to ``lambda`` including the whole
    cluster of ``lambda``.
    """
    phi = np.asarray(phi, dtype=float).reshape(-1)
    scale = 1.0 + a.norm
    if len(phi) != a.n or np.linalg.norm(a.entries @ phi - lam * phi) > tol_residual * scale * np.linalg.norm(phi):
        raise NotAnEigenvector(f"vector is not an eigenvector for {lam}")
    if np.abs(phi).min() <= tol_zero * scale * np.abs(phi).max():
        raise VanishingEntry("eigenvector has a vanishing entry")
    values = np.linalg.eigvalsh(a.entries)
    tol = tol_gap * scale
    counting = int(np.sum(values <= lam + tol))
    mult = int(np.sum(np.abs(values - lam) <= tol))
    nu = nodal_counts(a, phi.reshape(-1, 1), tol_zero).strong_counts[0]
    return LowerBoundVerdict(int(nu), counting, mult)
