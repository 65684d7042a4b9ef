"""Graphs, spanning frames, bipartitions and cycle covers.

Vertices are labelled ``1..n`` everywhere in the public API. Edges are stored
as sorted tuples ``(i, j)`` with ``i < j``.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Optional, Sequence

import numpy as np

from .exceptions import InvalidCover, InvalidGraph, ParseError
from .matching import hopcroft_karp

Edge = tuple[int, int]


@dataclass(frozen=True)
class Graph:
    """Simple connected undirected graph on vertices ``1..n``.

    Edges are normalized to ``i < j`` and sorted lexicographically. Loops,
    duplicates, out-of-range labels and disconnected inputs raise
    :class:`InvalidGraph`.
    """

    n: int
    edges: tuple[Edge, ...]

    def __post_init__(self):
        if not isinstance(self.n, (int, np.integer)) or isinstance(self.n, bool) or self.n < 1:
            raise InvalidGraph(f"vertex count must be a positive integer, got {self.n!r}")
        object.__setattr__(self, "n", int(self.n))
        seen = set()
        for e in self.edges:
            if len(e) != 2:
                raise InvalidGraph(f"edge {e!r} is not a pair")
            i, j = int(e[0]), int(e[1])
            if i == j:
                raise InvalidGraph(f"self-loop at vertex {i}")
            if not (1 <= i <= self.n and 1 <= j <= self.n):
                raise InvalidGraph(f"edge ({i},{j}) out of range 1..{self.n}")
            key = (min(i, j), max(i, j))
            if key in seen:
                raise InvalidGraph(f"duplicate edge {key}")
            seen.add(key)
        object.__setattr__(self, "edges", tuple(sorted(seen)))
        if _component_count(self.n, self.edges) != 1:
            raise InvalidGraph("graph is disconnected")

    @cached_property
    def neighbors(self) -> tuple[tuple[int, ...], ...]:
        """Sorted neighbor labels; index 0 is unused so ``neighbors[v]`` works."""
        adj: list[list[int]] = [[] for _ in range(self.n + 1)]
        for i, j in self.edges:
            adj[i].append(j)
            adj[j].append(i)
        return tuple(tuple(sorted(a)) for a in adj)

    @cached_property
    def edge_set(self) -> frozenset[Edge]:
        return frozenset(self.edges)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def has_edge(self, i: int, j: int) -> bool:
        return (min(i, j), max(i, j)) in self.edge_set

    def adjacency_matrix(self) -> np.ndarray:
        a = np.zeros((self.n, self.n))
        for i, j in self.edges:
            a[i - 1, j - 1] = a[j - 1, i - 1] = 1.0
        return a

    def degree(self, v: int) -> int:
        return len(self.neighbors[v])

    def to_dict(self) -> dict:
        return {"n": self.n, "edges": [list(e) for e in self.edges]}


def _component_count(n: int, edges: Iterable[Edge]) -> int:
    parent = list(range(n + 1))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    count = n
    for i, j in edges:
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[ri] = rj
            count -= 1
    return count


def graph_from_dict(doc) -> Graph:
    if not isinstance(doc, dict) or "n" not in doc or "edges" not in doc:
        raise ParseError('graph document needs fields "n" and "edges"')
    n, edges = doc["n"], doc["edges"]
    if not isinstance(n, int) or isinstance(n, bool):
        raise ParseError('"n" must be an integer')
    if not isinstance(edges, list) or not all(
        isinstance(e, list) and len(e) == 2 and all(isinstance(x, int) and not isinstance(x, bool) for x in e)
        for e in edges
    ):
        raise ParseError('"edges" must be a list of integer pairs')
    return Graph(n, tuple(tuple(e) for e in edges))


def load_graph(text: str) -> Graph:
    """Parse a graph JSON document ``{"n": int, "edges": [[i, j], ...]}``."""
    try:
        doc = json.loads(text)
    except (json.JSONDecodeError, TypeError) as exc:
        raise ParseError(f"malformed JSON: {exc}") from exc
    return graph_from_dict(doc)


def betti(g: Graph) -> int:
    """First Betti number ``|E| - n + 1``."""
    return g.n_edges - g.n + 1


# Standard families


def path_graph(n: int) -> Graph:
    return Graph(n, tuple((i, i + 1) for i in range(1, n)))


def cycle_graph(n: int) -> Graph:
    if n < 3:
        raise InvalidGraph("a cycle needs at least 3 vertices")
    return Graph(n, tuple((i, i + 1) for i in range(1, n)) + ((1, n),))


def complete_graph(n: int) -> Graph:
    return Graph(n, tuple((i, j) for i in range(1, n + 1) for j in range(i + 1, n + 1)))


def star_graph(leaves: int) -> Graph:
    """Star ``K_{1,leaves}`` with centre 1."""
    return Graph(leaves + 1, tuple((1, j) for j in range(2, leaves + 2)))


# Spanning frames


@dataclass(frozen=True)
class SpanningTreeFrame:
    """Spanning tree plus ordered cotree edges ``(r_l, s_l)``."""

    tree_edges: tuple[Edge, ...]
    cotree_edges: tuple[Edge, ...]

    @property
    def beta(self) -> int:
        return len(self.cotree_edges)

    def consistent_with(self, g: Graph) -> bool:
        both = set(self.tree_edges) | set(self.cotree_edges)
        return (
            both == set(g.edges)
            and not set(self.tree_edges) & set(self.cotree_edges)
            and len(self.tree_edges) == g.n - 1
        )


def spanning_frame(g: Graph) -> SpanningTreeFrame:
    """BFS tree from vertex 1 with neighbors in increasing order."""
    visited = [False] * (g.n + 1)
    visited[1] = True
    tree = []
    queue = deque([1])
    while queue:
        u = queue.popleft()
        for v in g.neighbors[u]:
            if not visited[v]:
                visited[v] = True
                tree.append((min(u, v), max(u, v)))
                queue.append(v)
    tree_set = set(tree)
    cotree = tuple(e for e in g.edges if e not in tree_set)
    return SpanningTreeFrame(tuple(sorted(tree)), cotree)


def bipartition(g: Graph) -> Optional[np.ndarray]:
    """Return a +-1 coloring with vertex 1 colored +1, or None for non-bipartite graphs."""
    color = np.zeros(g.n, dtype=int)
    color[0] = 1
    queue = deque([1])
    while queue:
        u = queue.popleft()
        for v in g.neighbors[u]:
            if color[v - 1] == 0:
                color[v - 1] = -color[u - 1]
                queue.append(v)
            elif color[v - 1] == color[u - 1]:
                return None
    return color


# Cycle covers


@dataclass(frozen=True)
class CoverComponent:
    """An edge ``(i, j)`` or an odd cycle listed in traversal order."""

    kind: str  # "edge" or "cycle"
    vertices: tuple[int, ...]

    def edges(self) -> list[Edge]:
        v = self.vertices
        if self.kind == "edge":
            return [(min(v), max(v))]
        k = len(v)
        return [(min(v[i], v[(i + 1) % k]), max(v[i], v[(i + 1) % k])) for i in range(k)]

    def to_dict(self) -> dict:
        return {"type": self.kind, "v": list(self.vertices)}


@dataclass(frozen=True)
class CycleCover:
    components: tuple[CoverComponent, ...]

    def component_of(self, n: int) -> list[int]:
        """0-based component index per vertex (index 0 of the list is unused)."""
        owner = [-1] * (n + 1)
        for c, comp in enumerate(self.components):
            for v in comp.vertices:
                owner[v] = c
        return owner

    def to_list(self) -> list[dict]:
        return [c.to_dict() for c in self.components]


def validate_cover(g: Graph, cover: CycleCover) -> None:
    """Raise :class:`InvalidCover` unless ``cover`` is a valid edge/odd-cycle cover of ``g``."""
    seen: set[int] = set()
    for comp in cover.components:
        v = comp.vertices
        if comp.kind == "edge":
            if len(v) != 2:
                raise InvalidCover(f"edge component {v} needs two vertices")
        elif comp.kind == "cycle":
            if len(v) < 3 or len(v) % 2 == 0:
                raise InvalidCover(f"cycle component {v} must have odd length >= 3")
        else:
            raise InvalidCover(f"unknown component type {comp.kind!r}")
        for x in v:
            if not 1 <= x <= g.n:
                raise InvalidCover(f"vertex {x} out of range")
            if x in seen:
                raise InvalidCover(f"vertex {x} covered twice")
            seen.add(x)
        for e in comp.edges():
            if e not in g.edge_set:
                raise InvalidCover(f"component edge {e} not in graph")
    if len(seen) != g.n:
        missing = sorted(set(range(1, g.n + 1)) - seen)
        raise InvalidCover(f"vertices {missing} not covered")


@dataclass(frozen=True)
class DeterminantalVerdict:
    kind: str  # "determinantal" or "sub-determinantal"
    cover: Optional[CycleCover] = None

    @property
    def determinantal(self) -> bool:
        return self.kind == "determinantal"

    def to_dict(self) -> dict:
        return {"kind": self.kind, "cover": self.cover.to_list() if self.cover else []}


def _cover_from_permutation(sigma: Sequence[int]) -> CycleCover:
    """Turn a fixed-point-free permutation (1-based, ``sigma[0]`` unused) into a normalized cover."""
    n = len(sigma) - 1
    seen = [False] * (n + 1)
    comps = []
    for start in range(1, n + 1):
        if seen[start]:
            continue
        cyc = []
        v = start
        while not seen[v]:
            seen[v] = True
            cyc.append(v)
            v = sigma[v]
        if len(cyc) == 2:
            comps.append(CoverComponent("edge", tuple(sorted(cyc))))
        elif len(cyc) % 2 == 1:
            comps.append(CoverComponent("cycle", tuple(cyc)))
        else:
            # cyc[0] is the smallest label of its cycle
            for t in range(0, len(cyc), 2):
                comps.append(CoverComponent("edge", tuple(sorted((cyc[t], cyc[t + 1])))))
    return CycleCover(tuple(comps))


def _bruteforce_cover(g: Graph) -> Optional[CycleCover]:
    """Exhaustive search for an edge/odd-cycle cover. Exponential; for small graphs."""
    covered = [False] * (g.n + 1)
    comps: list[CoverComponent] = []

    def odd_cycles_from(v):
        # simple cycles through v whose other vertices are uncovered
        path = [v]
        on_path = {v}

        def extend():
            u = path[-1]
            for w in g.neighbors[u]:
                if w == v and len(path) >= 3 and len(path) % 2 == 1:
                    yield tuple(path)
                elif not covered[w] and w not in on_path and w != v:
                    path.append(w)
                    on_path.add(w)
                    yield from extend()
                    path.pop()
                    on_path.discard(w)

        yield from extend()

    def solve():
        try:
            v = covered.index(False, 1)
        except ValueError:
            return True
        covered[v] = True
        for w in g.neighbors[v]:
            if not covered[w]:
                covered[w] = True
                comps.append(CoverComponent("edge", (v, w)))
                if solve():
                    return True
                comps.pop()
                covered[w] = False
        for cyc in odd_cycles_from(v):
            for x in cyc[1:]:
                covered[x] = True
            comps.append(CoverComponent("cycle", cyc))
            if solve():
                return True
            comps.pop()
            for x in cyc[1:]:
                covered[x] = False
        covered[v] = False
        return False

    return CycleCover(tuple(comps)) if solve() else None


def classify_determinantal(g: Graph, method: str = "matching") -> DeterminantalVerdict:
    """Decide whether some zero-diagonal matrix supported on ``g`` is invertible.

    A perfect matching of the bipartite double cover is a fixed-point-free
    permutation along edges; its cycles give the cover, with even cycles split
    into alternating edges.

    Args:
        g: the graph.
        method: ``"matching"`` (Hopcroft-Karp) or ``"bruteforce"`` (exhaustive,
            intended for cross-checks on small graphs).
    """
    if method == "bruteforce":
        cover = _bruteforce_cover(g)
    elif method == "matching":
        adjacency = [[v - 1 for v in g.neighbors[u]] for u in range(1, g.n + 1)]
        match = hopcroft_karp(adjacency, g.n)
        if any(v < 0 for v in match):
            cover = None
        else:
            cover = _cover_from_permutation([0] + [v + 1 for v in match])
    else:
        raise ValueError(f"unknown method {method!r}")
    if cover is None:
        return DeterminantalVerdict("sub-determinantal")
    return DeterminantalVerdict("determinantal", cover)


def connecting_edge_set(g: Graph, cover: CycleCover) -> tuple[tuple[Edge, ...], list[int]]:
    """Minimal edge set joining the cover components, plus component distances.

    Edges are taken greedily in lexicographic order (Kruskal on the contracted
    multigraph). Distances count connecting edges on the path from component 0.

    Returns:
        (edges, distances) where ``distances[c]`` belongs to ``cover.components[c]``.
    """
    validate_cover(g, cover)
    owner = cover.component_of(g.n)
    k = len(cover.components)
    parent = list(range(k))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    chosen = []
    for i, j in g.edges:
        ci, cj = find(owner[i]), find(owner[j])
        if ci != cj:
            parent[ci] = cj
            chosen.append((i, j))
    adj: list[list[int]] = [[] for _ in range(k)]
    for i, j in chosen:
        adj[owner[i]].append(owner[j])
        adj[owner[j]].append(owner[i])
    dist = [-1] * k
    dist[0] = 0
    queue = deque([0])
    while queue:
        c = queue.popleft()
        for d in adj[c]:
            if dist[d] < 0:
                dist[d] = dist[c] + 1
                queue.append(d)
    return tuple(chosen), dist


def verdict_from_dict(doc: dict) -> DeterminantalVerdict:
    comps = tuple(CoverComponent(c["type"], tuple(c["v"])) for c in doc.get("cover", []))
    return DeterminantalVerdict(doc["kind"], CycleCover(comps) if comps else None)
