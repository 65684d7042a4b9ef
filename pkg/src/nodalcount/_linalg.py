"""Small dense linear algebra helpers shared across modules."""

import numpy as np

from .exceptions import NumericalFailure


def spectral_norm(a: np.ndarray) -> float:
    if a.size == 0:
        return 0.0
    return float(np.linalg.norm(a, 2))


def fix_signs(vectors: np.ndarray, tol: float) -> np.ndarray:
    """Flip columns so the first entry with magnitude above ``tol`` is positive."""
    v = np.array(vectors, dtype=float, copy=True)
    for k in range(v.shape[1]):
        col = v[:, k]
        big = np.flatnonzero(np.abs(col) > tol)
        idx = big[0] if big.size else int(np.argmax(np.abs(col)))
        if col[idx] < 0:
            v[:, k] = -col
    return v


def sym_eigh(a: np.ndarray, tol_zero: float = 1e-9, check: bool = True):
    """Ascending eigenpairs of a real symmetric matrix with fixed sign convention.

    Raises:
        NumericalFailure: if the residual or orthonormality contract fails.
    """
    a = np.asarray(a, dtype=float)
    try:
        w, v = np.linalg.eigh(a)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(f"eigensolver failed: {exc}") from exc
    v = fix_signs(v, tol_zero)
    if check and a.size:
        scale = 1.0 + spectral_norm(a)
        resid = np.linalg.norm(a @ v - v * w, axis=0).max()
        ortho = np.abs(v.T @ v - np.eye(len(w))).max()
        if resid > 1e-10 * scale or ortho > 1e-10:
            raise NumericalFailure(f"eigensolver contract violated: residual {resid:.2e}, orthogonality {ortho:.2e}")
    return w, v


def pinv_sym(a: np.ndarray, tol: float) -> np.ndarray:
    """Pseudo-inverse of a symmetric matrix, dropping eigenvalues with ``|mu| <= tol``."""
    w, v = np.linalg.eigh(a)
    inv = np.zeros_like(w)
    keep = np.abs(w) > tol
    inv[keep] = 1.0 / w[keep]
    return (v * inv) @ v.T


def cluster_values(values: np.ndarray, tol: float) -> list[list[int]]:
    """Group sorted values whose consecutive differences are at most ``tol``."""
    groups: list[list[int]] = []
    for idx, x in enumerate(values):
        if groups and x - values[groups[-1][-1]] <= tol:
            groups[-1].append(idx)
        else:
            groups.append([idx])
    return groups
