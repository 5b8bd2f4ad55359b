"""Brute-force triangulated components for cross-checking the union-find.

Builds the auxiliary graph on occupied edges explicitly and runs BFS.
Deliberately naive; only meant for small test graphs.
"""

from __future__ import annotations

from collections import deque
from itertools import combinations

from .errors import InvalidArgumentError
from .graph_process import GraphState

MAX_VERTICES = 200


def _guard(state: GraphState) -> None:
    if state.n_vertices > MAX_VERTICES:
        raise InvalidArgumentError(
            f"reference oracle refuses graphs with more than {MAX_VERTICES} vertices "
            f"(got {state.n_vertices})"
        )


def occupied_pairs(state: GraphState) -> list[tuple[int, int]]:
    return [(u, v) for u in range(state.n_vertices) for v in state.adjacency[u] if u < v]


def build_hat_graph(state: GraphState) -> dict[tuple[int, int], set[tuple[int, int]]]:
    """Adjacency over occupied edges: e ~ f iff e, f lie in a fully occupied triangle."""
    _guard(state)
    edges = occupied_pairs(state)
    present = set(edges)
    hat = {e: set() for e in edges}
    # every vertex triple, checked independently of the adjacency sets
    for a, b, c in combinations(range(state.n_vertices), 3):
        tri = [(a, b), (a, c), (b, c)]
        if all(e in present for e in tri):
            for e, f in combinations(tri, 2):
                hat[e].add(f)
                hat[f].add(e)
    return hat


def oracle_components(state: GraphState) -> list[int]:
    """Component sizes of the hat graph, sorted descending."""
    hat = build_hat_graph(state)
    seen = set()
    sizes = []
    for start in hat:
        if start in seen:
            continue
        seen.add(start)
        queue = deque([start])
        size = 0
        while queue:
            e = queue.popleft()
            size += 1
            for f in hat[e]:
                if f not in seen:
                    seen.add(f)
                    queue.append(f)
        sizes.append(size)
    return sorted(sizes, reverse=True)
