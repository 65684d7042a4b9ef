"""Magnetic perturbations, eigenvalue Hessians at zero flux and Morse indices.

The magnetic matrix multiplies the entry ``(r_l, s_l)`` of every cotree edge
by ``exp(i theta_l)`` (and its transpose by the conjugate). Hermitian spectra
are computed through the real symmetric embedding
``[[Re, -Im], [Im, Re]]`` whose eigenvalues come in equal pairs.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .config import TOL_GAP, TOL_HESS
from .exceptions import DegenerateEigenvalue, DimensionMismatch, GapTooSmall, PairingFailure, PreconditionFailed
from .graph import SpanningTreeFrame, spanning_frame
from .spectral import EigenSystem, NodalReport, SupportedMatrix, eigensystem

PAIR_TOL = 1e-8
FD_RATIO = 0.1
FD_STEP_MAX = 0.1


@dataclass(frozen=True, eq=False)
class MagneticFrame:
    base: SupportedMatrix
    frame: SpanningTreeFrame
    theta: np.ndarray

    def __post_init__(self):
        theta = np.atleast_1d(np.asarray(self.theta, dtype=float)).ravel()
        if not self.frame.consistent_with(self.base.graph):
            raise PreconditionFailed("spanning frame does not match the matrix graph")
        if theta.size != self.frame.beta:
            raise DimensionMismatch(f"theta has {theta.size} entries, expected {self.frame.beta}")
        object.__setattr__(self, "theta", theta)

    def hermitian(self) -> np.ndarray:
        return magnetic_matrix(self.base.entries, self.frame, self.theta)


def magnetic_matrix(entries: np.ndarray, frame: SpanningTreeFrame, theta) -> np.ndarray:
    """Complex Hermitian ``A_theta``."""
    h = np.array(entries, dtype=complex)
    for (r, s), t in zip(frame.cotree_edges, np.atleast_1d(theta)):
        h[r - 1, s - 1] *= np.exp(1j * t)
        h[s - 1, r - 1] *= np.exp(-1j * t)
    return h


class _Embedding:
    """Evaluates ``lambda(theta)`` for a fixed matrix and frame."""

    def __init__(self, entries: np.ndarray, frame: SpanningTreeFrame):
        self.entries = np.asarray(entries, dtype=float)
        self.n = self.entries.shape[0]
        idx = np.array(frame.cotree_edges, dtype=int).reshape(-1, 2) - 1
        self.r, self.s = idx[:, 0], idx[:, 1]
        self.w = self.entries[self.r, self.s]
        self.scale = 1.0 + float(np.linalg.norm(self.entries, 2)) if self.n else 1.0

    def eigenvalues(self, theta) -> np.ndarray:
        n = self.n
        theta = np.asarray(theta, dtype=float)
        re = self.entries.copy()
        im = np.zeros_like(re)
        c, s = self.w * np.cos(theta), self.w * np.sin(theta)
        re[self.r, self.s] = c
        re[self.s, self.r] = c
        im[self.r, self.s] = s
        im[self.s, self.r] = -s
        big = np.empty((2 * n, 2 * n))
        big[:n, :n] = re
        big[n:, n:] = re
        big[:n, n:] = -im
        big[n:, :n] = im
        w = np.linalg.eigvalsh(big)
        lo, hi = w[0::2], w[1::2]
        if np.max(hi - lo, initial=0.0) > PAIR_TOL * self.scale:
            raise PairingFailure(f"embedding eigenvalues fail to pair (max split {np.max(hi - lo):.2e})")
        return 0.5 * (lo + hi)


def magnetic_eigenvalues(mf: MagneticFrame) -> np.ndarray:
    """Sorted eigenvalues of ``A_theta`` via the real embedding."""
    return _Embedding(mf.base.entries, mf.frame).eigenvalues(mf.theta)


@dataclass(frozen=True, eq=False)
class HessianStack:
    hessians: tuple  # beta x beta arrays, k = 1..n
    method: str  # "fd" or "pert"
    tol_hess: float

    @property
    def eigenvalues(self) -> list[np.ndarray]:
        return [np.linalg.eigvalsh(h) if h.size else np.zeros(0) for h in self.hessians]

    @property
    def morse_indices(self) -> tuple[int, ...]:
        return tuple(int(np.sum(e < -self.tol_hess)) for e in self.eigenvalues)

    @property
    def degenerate(self) -> tuple[bool, ...]:
        return tuple(bool(np.any(np.abs(e) <= self.tol_hess)) for e in self.eigenvalues)

    def trace_residual(self) -> float:
        if not self.hessians or not self.hessians[0].size:
            return 0.0
        return float(np.abs(np.sum(self.hessians, axis=0)).max())

    def to_list(self) -> list[dict]:
        return [
            {"k": k + 1, "H": h.tolist(), "morse": m, "method": self.method}
            for k, (h, m) in enumerate(zip(self.hessians, self.morse_indices))
        ]


def default_tol_hess(a: SupportedMatrix, tol: float = TOL_HESS) -> float:
    return tol * (1.0 + a.norm)


@dataclass(frozen=True, eq=False)
class FiniteDifferenceResult:
    hessians: np.ndarray  # (n, beta, beta)
    gradients: np.ndarray  # (n, beta)
    step: float


def fd_step_for(a: SupportedMatrix, frame: SpanningTreeFrame, h: Optional[float] = None,
                tol_gap: float = TOL_GAP, ratio: float = FD_RATIO) -> float:
    """Step used by the finite-difference Hessian.

    A flux step ``h`` moves eigenvalues by about ``h * max|A_rs|``. The step is
    kept below ``ratio`` times the smallest gap divided by that weight, which
    keeps the Richardson-extrapolated truncation error near ``ratio**4``
    relative. ``h=None`` returns that bound itself (capped at ``FD_STEP_MAX``).

    Raises:
        GapTooSmall: when the spectrum is not simple at ``tol_gap``.
    """
    gap = eigensystem(a).min_gap
    if gap <= tol_gap * (1.0 + a.norm):
        raise GapTooSmall(f"minimum gap {gap:.2e} leaves the eigenvalue ordering ambiguous")
    w = max((abs(a.entries[r - 1, s - 1]) for r, s in frame.cotree_edges), default=0.0)
    safe = FD_STEP_MAX if w == 0.0 else min(FD_STEP_MAX, ratio * gap / w)
    return safe if h is None else min(h, safe)


def _fd_once(emb: _Embedding, beta: int, h: float):
    n = emb.n
    f0 = emb.eigenvalues(np.zeros(beta))
    hess = np.zeros((n, beta, beta))
    grad = np.zeros((n, beta))
    eye = np.eye(beta)
    plus = [emb.eigenvalues(h * eye[l]) for l in range(beta)]
    minus = [emb.eigenvalues(-h * eye[l]) for l in range(beta)]
    for l in range(beta):
        hess[:, l, l] = (plus[l] - 2 * f0 + minus[l]) / h**2
        grad[:, l] = (plus[l] - minus[l]) / (2 * h)
        for m in range(l + 1, beta):
            pp = emb.eigenvalues(h * (eye[l] + eye[m]))
            pm = emb.eigenvalues(h * (eye[l] - eye[m]))
            mp = emb.eigenvalues(h * (-eye[l] + eye[m]))
            mm = emb.eigenvalues(-h * (eye[l] + eye[m]))
            hess[:, l, m] = hess[:, m, l] = (pp - pm - mp + mm) / (4 * h**2)
    return hess, grad


def hessians_fd(
    a: SupportedMatrix,
    frame: Optional[SpanningTreeFrame] = None,
    h: Optional[float] = None,
    adaptive: bool = True,
    richardson: bool = True,
    tol_gap: float = TOL_GAP,
) -> FiniteDifferenceResult:
    """Finite-difference Hessians of every ``lambda_k(theta)`` at zero flux.

    Central second differences on the diagonal, the four-point stencil off the
    diagonal, and one Richardson step combining ``h`` and ``h/2``.

    Args:
        a: base matrix with simple spectrum.
        frame: spanning frame (BFS frame by default).
        h: step; ``None`` picks it from the smallest gap (see :func:`fd_step_for`).
        adaptive: shrink an explicit ``h`` that is too large for the smallest
            gap; with ``False`` such a step raises :class:`GapTooSmall`.
        richardson: apply the ``(4 H(h/2) - H(h)) / 3`` extrapolation.
        tol_gap: relative gap below which the spectrum counts as degenerate.
    """
    if frame is None:
        frame = spanning_frame(a.graph)
    beta = frame.beta
    step = fd_step_for(a, frame, h, tol_gap)
    if h is not None and step < h and not adaptive:
        raise GapTooSmall(f"step {h:g} too large for the smallest gap; largest safe step is {step:.2e}")
    if beta == 0:
        return FiniteDifferenceResult(np.zeros((a.n, 0, 0)), np.zeros((a.n, 0)), step)
    emb = _Embedding(a.entries, frame)
    hess, grad = _fd_once(emb, beta, step)
    if richardson:
        hess_half, _ = _fd_once(emb, beta, step / 2)
        hess = (4 * hess_half - hess) / 3
    hess = 0.5 * (hess + np.transpose(hess, (0, 2, 1)))
    return FiniteDifferenceResult(hess, grad, step)


def hessian_fd(a: SupportedMatrix, frame: SpanningTreeFrame, k: int, h: Optional[float] = None, **kwargs) -> np.ndarray:
    """Finite-difference Hessian of ``lambda_k`` (1-based ``k``)."""
    return hessians_fd(a, frame, h, **kwargs).hessians[k - 1]


def _coupling(vectors: np.ndarray, w: np.ndarray, r: np.ndarray, s: np.ndarray, k: int) -> np.ndarray:
    """``g[j, l] = A_rs (phi_j(r) phi_k(s) - phi_j(s) phi_k(r))`` for 0-based ``k``."""
    pk = vectors[:, k]
    return w[None, :] * (vectors[r, :].T * pk[s][None, :] - vectors[s, :].T * pk[r][None, :])


def hessians_perturbative(
    a: SupportedMatrix,
    es: Optional[EigenSystem] = None,
    frame: Optional[SpanningTreeFrame] = None,
    tol_gap: float = TOL_GAP,
) -> np.ndarray:
    """Second-order perturbation Hessians for every ``k``; shape ``(n, beta, beta)``.

    ``H_lm = -2 delta_lm A_rs phi_k(r) phi_k(s) + 2 sum_{j != k} g_l(j) g_m(j) / (lambda_k - lambda_j)``
    """
    if es is None:
        es = eigensystem(a)
    if frame is None:
        frame = spanning_frame(a.graph)
    n, beta = a.n, frame.beta
    if beta == 0:
        return np.zeros((n, 0, 0))
    if es.min_gap <= tol_gap * (1.0 + a.norm):
        raise DegenerateEigenvalue(f"minimum gap {es.min_gap:.2e} below tolerance")
    idx = np.array(frame.cotree_edges, dtype=int) - 1
    r, s = idx[:, 0], idx[:, 1]
    w = a.entries[r, s]
    vals, vecs = es.values, es.vectors
    out = np.zeros((n, beta, beta))
    for k in range(n):
        g = _coupling(vecs, w, r, s, k)
        diff = vals[k] - vals
        diff[k] = np.inf
        out[k] = 2 * (g.T / diff[None, :]) @ g
        out[k][np.diag_indices(beta)] += -2 * w * vecs[r, k] * vecs[s, k]
    return 0.5 * (out + np.transpose(out, (0, 2, 1)))


def hessian_perturbative(a: SupportedMatrix, es: EigenSystem, frame: SpanningTreeFrame, k: int) -> np.ndarray:
    """Perturbative Hessian of ``lambda_k`` (1-based ``k``)."""
    return hessians_perturbative(a, es, frame)[k - 1]


def hessian_stack(
    a: SupportedMatrix,
    es: Optional[EigenSystem] = None,
    frame: Optional[SpanningTreeFrame] = None,
    method: str = "pert",
    tol_hess: Optional[float] = None,
    h: Optional[float] = None,
) -> HessianStack:
    if tol_hess is None:
        tol_hess = default_tol_hess(a)
    if method == "pert":
        hs = hessians_perturbative(a, es, frame)
    elif method == "fd":
        hs = hessians_fd(a, frame, h).hessians
    else:
        raise ValueError(f"unknown method {method!r}")
    return HessianStack(tuple(hs), method, tol_hess)


@dataclass(frozen=True)
class MorseVerdict:
    surpluses: tuple[int, ...]
    morse_indices: tuple[int, ...]
    degenerate: tuple[bool, ...]
    beta: int

    @property
    def mismatches(self) -> tuple[int, ...]:
        return tuple(k + 1 for k, (s, m) in enumerate(zip(self.surpluses, self.morse_indices)) if s != m)

    @property
    def index_sum_ok(self) -> bool:
        return sum(self.morse_indices) >= self.beta

    @property
    def passed(self) -> bool:
        return not self.mismatches and not any(self.degenerate)

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "surpluses": list(self.surpluses),
            "morse_indices": list(self.morse_indices),
            "degenerate": [k + 1 for k, d in enumerate(self.degenerate) if d],
            "mismatches": list(self.mismatches),
            "index_sum_ok": self.index_sum_ok,
        }


def morse_verify(
    a: SupportedMatrix,
    es: EigenSystem,
    frame: SpanningTreeFrame,
    report: NodalReport,
    tol_hess: Optional[float] = None,
    stack: Optional[HessianStack] = None,
) -> MorseVerdict:
    """Compare Morse indices of the magnetic Hessians with nodal surpluses.

    Near-degenerate Hessians are flagged in the verdict rather than raised.
    """
    if stack is None:
        stack = hessian_stack(a, es, frame, "pert", tol_hess)
    return MorseVerdict(tuple(report.surpluses), stack.morse_indices, stack.degenerate, frame.beta)
