"""Initial graphs: empty, uniform with M edges, triangle-free with M edges, or read from a file."""

from __future__ import annotations

import os

import numpy as np

from .component_stats import normalization
from .errors import ConstructionError, IngestionError, InvalidArgumentError
from .graph_process import GraphState, n_pairs, sample_vacant_pairs


def edge_target(n: int, m1_0: float) -> int:
    """Number of edges M = round(m1_0 * N^(3/2) / 2)."""
    if m1_0 < 0:
        raise InvalidArgumentError(f"m1_0 must be non-negative, got {m1_0}")
    m = round(m1_0 * normalization(n))
    if m > n_pairs(n):
        raise InvalidArgumentError(f"{m} edges do not fit in K_{n}")
    return m


def empty(n: int) -> GraphState:
    if n < 3:
        raise InvalidArgumentError(f"need at least 3 vertices, got {n}")
    return GraphState(n)


def er_initial(n: int, m1_0: float, seed) -> GraphState:
    """Uniform random graph with exactly M edges, inserted in random order."""
    state = empty(n)
    m = edge_target(n, m1_0)
    rng = np.random.default_rng(seed)
    state.occupy_many(sample_vacant_pairs(state, m, rng))
    return state


def triangle_free_initial(n: int, m1_0: float, seed, max_attempts_factor: int = 10) -> GraphState:
    """Random sequential insertion of M edges, rejecting any edge that closes a triangle.

    Not uniform over triangle-free graphs, but every component has weight 1,
    which is the only property the analysis uses.
    """
    state = empty(n)
    m = edge_target(n, m1_0)
    rng = np.random.default_rng(seed)
    cap = max_attempts_factor * m
    attempts = 0
    adj = state.adjacency
    while state.n_edges < m:
        if attempts >= cap:
            raise ConstructionError(
                f"triangle-free construction stalled at {state.n_edges}/{m} edges "
                f"after {attempts} attempts (n={n}, m1_0={m1_0})"
            )
        batch = sample_vacant_pairs(state, min(m - state.n_edges, cap - attempts), rng)
        for u, v in batch:
            attempts += 1
            if v in adj[u] or adj[u] & adj[v]:
                continue
            state.occupy_many([(u, v)])
            if state.n_edges == m:
                break
    return state


def read_edge_list(path) -> tuple[int, list[tuple[int, int]]]:
    """Parse the edge-list format: a line ``N`` then ``u v`` per edge, 0-based."""
    with open(path) as fh:
        lines = fh.read().splitlines()
    body = [(i, line.strip()) for i, line in enumerate(lines, start=1) if line.strip()]
    if not body:
        raise IngestionError("empty file", line=1)
    lineno, head = body[0]
    try:
        n = int(head)
    except ValueError:
        raise IngestionError(f"expected vertex count, got {head!r}", line=lineno) from None
    if n < 1:
        raise IngestionError(f"vertex count must be positive, got {n}", line=lineno)
    seen = set()
    pairs = []
    for lineno, line in body[1:]:
        parts = line.split()
        if len(parts) != 2:
            raise IngestionError(f"expected 'u v', got {line!r}", line=lineno)
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError:
            raise IngestionError(f"non-integer vertex in {line!r}", line=lineno) from None
        if u == v:
            raise IngestionError(f"self-loop at vertex {u}", line=lineno)
        if not (0 <= u < n and 0 <= v < n):
            raise IngestionError(f"vertex out of range [0, {n})", line=lineno)
        key = (min(u, v), max(u, v))
        if key in seen:
            raise IngestionError(f"duplicate edge {key}", line=lineno)
        seen.add(key)
        pairs.append(key)
    return n, pairs


def from_edge_list(path: str | os.PathLike) -> GraphState:
    n, pairs = read_edge_list(path)
    state = GraphState(n)
    state.occupy_many(pairs)
    return state


def write_edge_list(state: GraphState, path: str | os.PathLike) -> None:
    with open(path, "w") as fh:
        fh.write(f"{state.n_vertices}\n")
        for u, v in sorted(state.endpoints):
            fh.write(f"{u} {v}\n")
