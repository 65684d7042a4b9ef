"""Analytic perturbation of eigenpairs of ``A + eps B`` and sign stabilization."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ._linalg import cluster_values, fix_signs, spectral_norm, sym_eigh
from .config import TOL_GAP, TOL_ZERO
from .exceptions import DegenerateBase, NoStabilization, PreconditionFailed, UnresolvedMultiplicity
from .graph import Graph, betti
from .spectral import GENERAL, ZERO_DIAGONAL, SupportedMatrix, check_ncc, eigensystem, nodal_counts, verify_surplus_bounds

MAX_HALVINGS = 40
MAX_RESAMPLES = 32


def _dense(x) -> np.ndarray:
    return x.entries if isinstance(x, SupportedMatrix) else np.asarray(x, dtype=float)


def simplicity_radius(a, b, tol_gap: float = TOL_GAP) -> float:
    """Radius ``T`` such that ``A + eps B`` has simple spectrum for ``|eps| < T``.

    ``T = min gap(A) / max |lambda(B)|``; returns ``inf`` when ``B = 0``.

    Raises:
        DegenerateBase: if ``A`` has a repeated eigenvalue at ``tol_gap``.
    """
    a, b = _dense(a), _dense(b)
    w = np.linalg.eigvalsh(a)
    gap = np.diff(w).min() if len(w) > 1 else math.inf
    if gap <= tol_gap * (1.0 + spectral_norm(a)):
        raise DegenerateBase(f"minimum gap {gap:.2e} of the base matrix is below tolerance")
    bmax = np.abs(np.linalg.eigvalsh(b)).max() if b.size else 0.0
    return math.inf if bmax == 0 else float(gap / bmax)


@dataclass(frozen=True, eq=False)
class PerturbationSeries:
    """Coefficients of ``lambda(eps) = sum eps^j lambda^(j)`` and ``phi(eps) = sum eps^j phi^(j)``.

    ``branch`` is ``"simple"`` or ``"multiple"``; for the latter ``peers`` holds
    the 1-based indices sharing ``lambda^(0)`` and ``splits`` their first-order
    eigenvalue corrections. Vectors use intermediate normalization
    ``<phi^(0), phi^(j)> = 0`` for ``j >= 1``.
    """

    lambda_coeffs: np.ndarray
    vector_coeffs: np.ndarray  # shape (J + 1, n)
    branch: str = "simple"
    peers: tuple = ()
    splits: tuple = ()

    @property
    def order(self) -> int:
        return len(self.lambda_coeffs) - 1

    def eigenvalue(self, eps: float) -> float:
        return float(np.polyval(self.lambda_coeffs[::-1], eps))

    def eigenvector(self, eps: float) -> np.ndarray:
        powers = eps ** np.arange(self.order + 1)
        return powers @ self.vector_coeffs


def _reduced_resolvent(values: np.ndarray, vectors: np.ndarray, cluster: list[int]) -> np.ndarray:
    """Pseudo-inverse of ``A - lambda I`` with the cluster's eigenspace as kernel."""
    lam = values[cluster].mean()
    keep = np.setdiff1d(np.arange(len(values)), cluster)
    v = vectors[:, keep]
    return (v / (values[keep] - lam)) @ v.T


def _cluster_of(values: np.ndarray, k: int, tol: float) -> list[int]:
    for group in cluster_values(values, tol):
        if k in group:
            return group
    raise AssertionError("unreachable")


def perturbation_series(a, b, k: int, order: int = 1, tol_gap: float = TOL_GAP, tol_zero: float = TOL_ZERO
                        ) -> PerturbationSeries:
    """Rayleigh-Schrodinger coefficients for the ``k``-th eigenpair of ``A + eps B``.

    Args:
        a, b: symmetric matrices (arrays or :class:`SupportedMatrix`).
        k: 1-based eigenvalue index of ``A``.
        order: highest order ``J``. The multiple-eigenvalue branch stops at 1.
        tol_gap: relative tolerance deciding whether ``lambda_k`` is repeated.
        tol_zero: sign convention threshold for the unperturbed vectors.

    Raises:
        UnresolvedMultiplicity: if ``B`` does not split a repeated eigenvalue.
    """
    a, b = _dense(a), _dense(b)
    values, vectors = sym_eigh(a, tol_zero)
    scale = 1.0 + spectral_norm(a)
    idx = k - 1
    cluster = _cluster_of(values, idx, tol_gap * scale)
    res = _reduced_resolvent(values, vectors, cluster)
    lam0 = values[idx]

    if len(cluster) == 1:
        phi = [vectors[:, idx].copy()]
        lams = [lam0]
        for j in range(1, order + 1):
            lams.append(float(phi[0] @ b @ phi[j - 1]))
            rhs = -b @ phi[j - 1] + sum(lams[m] * phi[j - m] for m in range(1, j + 1))
            phi.append(res @ rhs)
        return PerturbationSeries(np.array(lams), np.array(phi))

    # Repeated eigenvalue: diagonalize B on the eigenspace, order 1 only
    q = vectors[:, cluster]
    mu, w = np.linalg.eigh(q.T @ b @ q)
    if np.diff(mu).min() <= tol_gap * (1.0 + spectral_norm(b)):
        raise UnresolvedMultiplicity("B does not split the repeated eigenvalue at first order")
    split = fix_signs(q @ w, tol_zero)
    pos = cluster.index(idx)
    phi0 = split[:, pos]
    bphi = b @ split
    phi1 = -res @ bphi[:, pos]
    for p in range(len(cluster)):
        if p != pos:
            c = -float((res @ bphi[:, p]) @ bphi[:, pos]) / (mu[pos] - mu[p])
            phi1 = phi1 + c * split[:, p]
    return PerturbationSeries(
        np.array([lam0, mu[pos]]),
        np.array([phi0, phi1]),
        branch="multiple",
        peers=tuple(i + 1 for i in cluster),
        splits=tuple(float(x) for x in mu),
    )


def series_residual(a, b, series: PerturbationSeries, j: int) -> float:
    """Residual of the order-``j`` equation ``(A - l0) phi_j + B phi_{j-1} - sum l_m phi_{j-m}``."""
    a, b = _dense(a), _dense(b)
    lam, phi = series.lambda_coeffs, series.vector_coeffs
    r = (a - lam[0] * np.eye(len(a))) @ phi[j]
    if j >= 1:
        r = r + b @ phi[j - 1] - sum(lam[m] * phi[j - m] for m in range(1, j + 1))
    return float(np.linalg.norm(r))


def reference_basis(a, b, tol_gap: float = TOL_GAP, tol_zero: float = TOL_ZERO) -> np.ndarray:
    """Unperturbed eigenbasis of ``A`` with repeated eigenspaces split by ``B``."""
    a, b = _dense(a), _dense(b)
    values, vectors = sym_eigh(a, tol_zero)
    basis = vectors.copy()
    for group in cluster_values(values, tol_gap * (1.0 + spectral_norm(a))):
        if len(group) > 1:
            q = vectors[:, group]
            _, w = np.linalg.eigh(q.T @ b @ q)
            basis[:, group] = fix_signs(q @ w, tol_zero)
    return basis


@dataclass(frozen=True, eq=False)
class StabilizedSigns:
    signs: np.ndarray  # columns are sign vectors, entries in {-1, 0, 1}
    epsilon: float
    levels: int

    def to_dict(self) -> dict:
        return {"signs": self.signs.T.astype(int).tolist(), "epsilon": self.epsilon}


def _aligned_eigvecs(m: np.ndarray, ref: np.ndarray, tol_gap: float):
    w, v = np.linalg.eigh(m)
    scale = 1.0 + spectral_norm(m)
    simple = len(w) < 2 or np.diff(w).min() > tol_gap * scale
    flip = np.sign(np.sum(v * ref, axis=0))
    flip[flip == 0] = 1.0
    return v * flip, simple, scale


def stabilized_signs(
    a,
    b,
    eps0: Optional[float] = None,
    max_halvings: int = MAX_HALVINGS,
    tol_gap: float = TOL_GAP,
    tol_zero: float = TOL_ZERO,
    series_order: int = 6,
) -> StabilizedSigns:
    """Eigenvector signs of ``A + eps B`` for small ``eps > 0``.

    Runs ``eps, eps/2, eps/4, ...`` until two consecutive levels have simple
    spectra and identical signs on every entry above ``tol_zero``. Vectors are
    aligned with the unperturbed basis (split by ``B`` on repeated
    eigenvalues) so signs inherit its first-entry-positive convention. Entries
    that stay below threshold take the sign of the first nonzero series
    coefficient, or 0 if none is found up to ``series_order``.

    Raises:
        NoStabilization: if the budget is exhausted.
    """
    a, b = _dense(a), _dense(b)
    if eps0 is None:
        try:
            t = simplicity_radius(a, b, tol_gap)
        except DegenerateBase:
            t = None
        eps0 = 1e-2 if t is None else min(0.1, t / 4)
        if not math.isfinite(eps0):
            eps0 = 0.1
    ref = reference_basis(a, b, tol_gap, tol_zero)

    prev = None
    eps = eps0
    for level in range(max_halvings + 1):
        v, simple, scale = _aligned_eigvecs(a + eps * b, ref, tol_gap)
        big = np.abs(v) > tol_zero * scale
        cur = (np.where(big, np.sign(v), 0.0), big) if simple else None
        if cur is not None and prev is not None:
            both = cur[1] & prev[1]
            if np.array_equal(cur[0][both], prev[0][both]) and np.array_equal(cur[1], prev[1]):
                signs = cur[0].copy()
                if not big.all():
                    _fill_from_series(signs, a, b, tol_gap, tol_zero, series_order)
                return StabilizedSigns(signs.astype(int), eps, level + 1)
        prev = cur
        eps /= 2
    raise NoStabilization(f"signs did not stabilize after {max_halvings} halvings from eps={eps0:g}")


def _fill_from_series(signs: np.ndarray, a, b, tol_gap, tol_zero, order):
    n = len(a)
    thr = tol_zero * (1.0 + spectral_norm(a))
    for k in range(n):
        missing = np.flatnonzero(signs[:, k] == 0)
        if not missing.size:
            continue
        try:
            s = perturbation_series(a, b, k + 1, order, tol_gap, tol_zero)
        except UnresolvedMultiplicity:
            continue
        for i in missing:
            for coeff in s.vector_coeffs[:, i]:
                if abs(coeff) > thr:
                    signs[i, k] = np.sign(coeff)
                    break


@dataclass(frozen=True, eq=False)
class SignBasis:
    signs: np.ndarray  # columns xi_k
    epsilon: float
    attempts: int = 0
    total: Optional[int] = None

    def to_dict(self) -> dict:
        return {"signs": self.signs.T.astype(int).tolist(), "epsilon": self.epsilon, "total": self.total,
                "attempts": self.attempts}


def random_perturbation(graph: Graph, mode: str, rng: np.random.Generator) -> np.ndarray:
    """Standard normal symmetric matrix on the edges (and diagonal unless zero-diagonal)."""
    n = graph.n
    b = np.zeros((n, n))
    for i, j in graph.edges:
        b[i - 1, j - 1] = b[j - 1, i - 1] = rng.standard_normal()
    if mode != ZERO_DIAGONAL:
        b[np.diag_indices(n)] = rng.standard_normal(n)
    return b


def sign_vanishing_entries(
    a: SupportedMatrix,
    seed: int = 0,
    max_resamples: int = MAX_RESAMPLES,
    tol_gap: float = TOL_GAP,
    tol_zero: float = TOL_ZERO,
    eps0: Optional[float] = None,
) -> SignBasis:
    """Sign vectors for an eigenbasis whose vectors may vanish at some entries.

    Samples random perturbations ``B`` supported on the graph and stabilizes
    the signs of ``A + eps B``. A candidate is accepted when it agrees with
    every non-negligible entry of the eigenbasis of ``A`` and its total nodal
    count obeys the main bounds.

    Raises:
        DegenerateBase: if ``A`` has a repeated eigenvalue.
        NoStabilization: if no candidate is accepted after ``max_resamples`` draws.
    """
    es = eigensystem(a, tol_zero)
    if es.min_gap <= tol_gap * (1.0 + a.norm):
        raise DegenerateBase("matrix must have simple eigenvalues")
    ncc = check_ncc(a, es, tol_gap, tol_zero)
    signs_a = np.sign(es.vectors)
    beta = betti(a.graph)
    if ncc.satisfied:
        return SignBasis(signs_a.astype(int), 0.0, 0, nodal_counts(a, signs_a, tol_zero).total)
    known = np.abs(es.vectors) > tol_zero * (1.0 + a.norm)
    rng = np.random.default_rng(seed)
    failures = []
    for attempt in range(1, max_resamples + 1):
        b = random_perturbation(a.graph, a.mode, rng)
        try:
            st = stabilized_signs(a.entries, b, eps0, tol_gap=tol_gap, tol_zero=tol_zero)
        except NoStabilization as exc:
            failures.append(str(exc))
            continue
        if np.any(st.signs == 0) or np.any(st.signs[known] != signs_a[known]):
            failures.append("signing disagrees with the unperturbed eigenbasis")
            continue
        report = nodal_counts(a, st.signs.astype(float), tol_zero)
        if not verify_surplus_bounds(report, beta, a.n).passed:
            failures.append(f"total {report.total} outside the bounds")
            continue
        return SignBasis(st.signs, st.epsilon, attempt, report.total)
    raise NoStabilization(f"no valid signing after {max_resamples} samples; last: {failures[-3:]}")


# C_4 diagonal-perturbation survey


@dataclass(frozen=True)
class SurveyResult:
    fraction: float
    samples: int
    rejected: int

    @property
    def complement(self) -> float:
        return 1.0 - self.fraction

    def to_dict(self) -> dict:
        return {"fraction": self.fraction, "complement": self.complement, "samples": self.samples,
                "rejected": self.rejected}


def _sample_cube_surface(rng: np.random.Generator, size: int) -> np.ndarray:
    """Uniform samples on the boundary of ``[-1, 1]^4``, the unit sphere of the operator norm of a diagonal."""
    d = rng.uniform(-1.0, 1.0, size=(size, 4))
    face = rng.integers(0, 4, size=size)
    d[np.arange(size), face] = rng.choice([-1.0, 1.0], size=size)
    return d


def _preserves_sign_structure(d: np.ndarray) -> np.ndarray:
    d1, d2, d3, d4 = d.T
    c1 = np.sign(2 * d4 - d1 - d3) == -np.sign(2 * d2 - d1 - d3)
    c2 = np.sign(2 * d3 - d2 - d4) == -np.sign(2 * d1 - d2 - d4)
    return c1 & c2


def diag_perturbation_sign_survey(samples: int = 10**6, seed: int = 0, chunk: int = 200_000) -> SurveyResult:
    """Monte-Carlo fraction of diagonal perturbations of ``C_4`` that keep a null-space sign structure.

    ``D`` is drawn uniformly from the unit sphere of the operator 2-norm,
    which for diagonal matrices is the surface of the cube ``max|D_i| = 1``.
    Draws with ``D1 + D3 = D2 + D4`` are rejected and redrawn.
    """
    rng = np.random.default_rng(seed)
    hits = done = rejected = 0
    while done < samples:
        size = min(chunk, samples - done)
        d = _sample_cube_surface(rng, size)
        ok = (d[:, 0] + d[:, 2]) != (d[:, 1] + d[:, 3])
        rejected += int(size - ok.sum())
        d = d[ok]
        hits += int(_preserves_sign_structure(d).sum())
        done += len(d)
    return SurveyResult(hits / done, done, rejected)


def c4_exact_fraction() -> float:
    """Exact sign-preserving fraction from the polytope volume on the face ``D1 = 1``.

    By symmetry it suffices to take ``D1 = 1`` and ``D2 > D4``; the admissible
    region is a polytope in ``(D2, D3, D4)`` inside half of the face, which has
    volume 4.
    """
    from scipy.spatial import ConvexHull, HalfspaceIntersection

    # rows (a, b) encode a.x + b <= 0 for x = (D2, D3, D4)
    rows = []
    for i in range(3):
        e = np.zeros(3)
        e[i] = 1.0
        rows += [np.r_[e, -1.0], np.r_[-e, -1.0]]
    rows += [
        [0.0, -1.0, 2.0, -1.0],  # 2 D4 <= 1 + D3
        [-2.0, 1.0, 0.0, 1.0],  # 1 + D3 <= 2 D2
        [-1.0, 2.0, -1.0, 0.0],  # 2 D3 <= D2 + D4
        [1.0, 0.0, 1.0, -2.0],  # D2 + D4 <= 2
        [-1.0, 0.0, 1.0, 0.0],  # D4 <= D2
    ]
    hs = HalfspaceIntersection(np.array(rows), np.array([0.5, -0.3, 0.0]))
    return float(ConvexHull(hs.intersections).volume / 4.0)
