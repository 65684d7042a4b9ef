"""Hopcroft-Karp maximum matching on a bipartite graph."""

from collections import deque
from typing import Sequence

_UNMATCHED = -1


def hopcroft_karp(adjacency: Sequence[Sequence[int]], n_right: int) -> list[int]:
    """Maximum cardinality matching.

    Args:
        adjacency: ``adjacency[u]`` lists the right vertices adjacent to left
            vertex ``u`` (0-based). Neighbors are tried in the given order, so
            the result is deterministic.
        n_right: number of right vertices.

    Returns:
        ``match[u]`` = right partner of left vertex ``u`` or -1.
    """
    n_left = len(adjacency)
    match_left = [_UNMATCHED] * n_left
    match_right = [_UNMATCHED] * n_right
    inf = n_left + n_right + 1

    while True:
        # BFS layering from free left vertices
        dist = [inf] * n_left
        queue = deque()
        for u in range(n_left):
            if match_left[u] == _UNMATCHED:
                dist[u] = 0
                queue.append(u)
        found = False
        while queue:
            u = queue.popleft()
            for v in adjacency[u]:
                w = match_right[v]
                if w == _UNMATCHED:
                    found = True
                elif dist[w] == inf:
                    dist[w] = dist[u] + 1
                    queue.append(w)
        if not found:
            break

        # DFS along layers, iterative to avoid recursion limits
        for root in range(n_left):
            if match_left[root] != _UNMATCHED:
                continue
            stack = [(root, iter(adjacency[root]))]
            path = []
            while stack:
                u, it = stack[-1]
                advanced = False
                for v in it:
                    w = match_right[v]
                    if w == _UNMATCHED:
                        path.append((u, v))
                        for pu, pv in path:
                            match_left[pu] = pv
                            match_right[pv] = pu
                        stack = []
                        advanced = True
                        break
                    if dist[w] == dist[u] + 1:
                        path.append((u, v))
                        stack.append((w, iter(adjacency[w])))
                        advanced = True
                        break
                if not advanced:
                    dist[u] = inf
                    stack.pop()
                    if path:
                        path.pop()
    return match_left


def has_perfect_matching(adjacency: Sequence[Sequence[int]], n_right: int) -> bool:
    match = hopcroft_karp(adjacency, n_right)
    return len(adjacency) == n_right and all(v != _UNMATCHED for v in match)
