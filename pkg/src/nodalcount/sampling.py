"""Seeded random graphs and matrices."""

from __future__ import annotations

import hashlib
from typing import Optional, Sequence, Union

import numpy as np

from .graph import Graph, _component_count
from .spectral import GENERAL, ZERO_DIAGONAL, SupportedMatrix

SeedLike = Union[int, np.random.Generator, None]


def derive_seed(master: int, name: str) -> int:
    """64-bit seed from ``(master, name)`` so each check owns an independent stream."""
    h = hashlib.blake2b(f"{int(master)}:{name}".encode(), digest_size=8)
    return int.from_bytes(h.digest(), "little")


def as_rng(seed: SeedLike) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def random_supported_matrix(g: Graph, mode: str = GENERAL, seed: SeedLike = 0) -> SupportedMatrix:
    """Standard normal entries on the edges (and the diagonal unless zero-diagonal)."""
    rng = as_rng(seed)
    n = g.n
    m = np.zeros((n, n))
    if g.edges:
        idx = np.array(g.edges) - 1
        w = rng.standard_normal(len(idx))
        m[idx[:, 0], idx[:, 1]] = w
        m[idx[:, 1], idx[:, 0]] = w
    if mode != ZERO_DIAGONAL:
        m[np.diag_indices(n)] = rng.standard_normal(n)
    return SupportedMatrix(g, m, mode)


def random_connected_graph(n: int, p: float = 0.5, seed: SeedLike = 0, max_tries: int = 1000) -> Graph:
    """Erdos-Renyi ``G(n, p)`` conditioned on connectivity (rejection sampling)."""
    rng = as_rng(seed)
    pairs = [(i, j) for i in range(1, n + 1) for j in range(i + 1, n + 1)]
    for _ in range(max_tries):
        keep = rng.random(len(pairs)) < p
        edges = [e for e, k in zip(pairs, keep) if k]
        if _component_count(n, edges) == 1:
            return Graph(n, tuple(edges))
    raise RuntimeError(f"no connected G({n}, {p}) sample in {max_tries} tries")


def random_tree(n: int, seed: SeedLike = 0) -> Graph:
    """Random recursive tree with shuffled labels."""
    rng = as_rng(seed)
    perm = rng.permutation(n) + 1
    edges = []
    for v in range(1, n):
        u = int(rng.integers(0, v))
        edges.append((int(perm[u]), int(perm[v])))
    return Graph(n, tuple(edges))


def random_bipartite_matching_graph(n: int, p: float = 0.3, seed: SeedLike = 0, max_tries: int = 1000) -> Graph:
    """Connected bipartite graph on ``n`` (even) vertices containing a perfect matching."""
    if n % 2:
        raise ValueError("n must be even")
    rng = as_rng(seed)
    half = n // 2
    for _ in range(max_tries):
        perm = rng.permutation(n) + 1
        left, right = perm[:half], perm[half:]
        edges = {(min(a, b), max(a, b)) for a, b in zip(left, right)}
        for a in left:
            for b in right:
                if rng.random() < p:
                    edges.add((min(a, b), max(a, b)))
        edges = sorted((int(a), int(b)) for a, b in edges)
        if _component_count(n, edges) == 1:
            return Graph(n, tuple(edges))
    raise RuntimeError("no connected bipartite sample found")


def planted_spectrum_matrix(values: Sequence[float], seed: SeedLike = 0) -> np.ndarray:
    """``Q diag(values) Q^T`` with Haar-random orthogonal ``Q``."""
    rng = as_rng(seed)
    n = len(values)
    q, r = np.linalg.qr(rng.standard_normal((n, n)))
    q = q * np.sign(np.diag(r))
    m = (q * np.asarray(values, dtype=float)) @ q.T
    return (m + m.T) / 2


def planted_multiplicity_matrix(multiplicities: Sequence[int], seed: SeedLike = 0, spacing: float = 1.0) -> np.ndarray:
    """Random symmetric matrix whose eigenvalue ``i`` has multiplicity ``multiplicities[i]``."""
    rng = as_rng(seed)
    base = np.cumsum(spacing * (1.0 + rng.random(len(multiplicities))))
    values = np.repeat(base, multiplicities)
    return planted_spectrum_matrix(values, rng)


def random_nonpositive_path(n: int, seed: SeedLike = 0) -> SupportedMatrix:
    """Path matrix with entries in ``[-1.5, -0.5]`` off the diagonal and ``[-1, 0]`` on it."""
    from .graph import path_graph

    rng = as_rng(seed)
    m = np.diag(-rng.random(n))
    off = -(0.5 + rng.random(max(n - 1, 0)))
    m += np.diag(off, 1) + np.diag(off, -1)
    return SupportedMatrix(path_graph(n), m)
