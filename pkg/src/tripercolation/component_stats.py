"""Observables of a GraphState: component histogram, densities, cherries, tree audit."""

from __future__ import annotations

from collections import Counter, defaultdict
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import ConsistencyError, InvalidArgumentError, InvalidStateError
from .graph_process import GraphState, n_pairs, sample_vacant_pairs


def normalization(n: int) -> float:
    """Edge-density unit: half of N^(3/2)."""
    return 0.5 * n ** 1.5


@dataclass
class ComponentHistogram:
    """Finite-component counts with the single largest component held out.

    ``counts[n]`` is the number of components of weight n excluding exactly
    one component of weight ``largest_weight``.
    """

    counts: dict[int, int] = field(default_factory=dict)
    largest_weight: int = 0

    @property
    def finite_edges(self) -> int:
        return sum(n * c for n, c in self.counts.items())

    @property
    def total_edges(self) -> int:
        return self.finite_edges + self.largest_weight

    @property
    def n_components(self) -> int:
        return sum(self.counts.values())

    def even_weight_components(self) -> int:
        return sum(c for n, c in self.counts.items() if n % 2 == 0)

    def even_weight_fraction(self) -> float:
        total = self.n_components
        return self.even_weight_components() / total if total else 0.0


def histogram(state: GraphState) -> ComponentHistogram:
    counts = +state.weight_counts
    if not counts:
        return ComponentHistogram()
    largest = max(counts)
    counts[largest] -= 1
    return ComponentHistogram({n: c for n, c in sorted(counts.items()) if c}, largest)


@dataclass(frozen=True)
class Observables:
    m1_star: float
    m1_finite: float
    m2_finite: float
    largest_fraction: float
    susceptibility: float


def observables(hist: ComponentHistogram, n: int, edge_count: int) -> Observables:
    """Densities in units of N^(3/2)/2; the finite/largest split is exact on integers."""
    finite = hist.finite_edges
    if finite + hist.largest_weight != edge_count:
        raise ConsistencyError(
            f"histogram accounts for {finite + hist.largest_weight} edges, expected {edge_count}"
        )
    second = sum(k * k * c for k, c in hist.counts.items())
    norm = normalization(n)
    return Observables(
        m1_star=edge_count / norm,
        m1_finite=finite / norm,
        m2_finite=second / norm,
        largest_fraction=hist.largest_weight / norm,
        susceptibility=second / finite if finite else 0.0,
    )


def state_observables(state: GraphState) -> Observables:
    return observables(histogram(state), state.n_vertices, state.n_edges)


def densities(hist: ComponentHistogram, n: int) -> dict[int, float]:
    """c_n = C_n / (N^(3/2)/2) over the finite components."""
    norm = normalization(n)
    return {k: c / norm for k, c in hist.counts.items()}


def cherry_census(state: GraphState, sample_size: int, seed) -> tuple[float, Counter]:
    """Common-neighbour counts of uniformly sampled vacant pairs (with replacement)."""
    if sample_size < 1:
        raise InvalidArgumentError(f"sample_size must be >= 1, got {sample_size}")
    n = state.n_vertices
    vacant = n_pairs(n) - state.n_edges
    if vacant == 0:
        raise InvalidStateError("no vacant edge to sample")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    adj = state.adjacency
    counts: Counter[int] = Counter()
    for _ in range(sample_size):
        (u, v), = sample_vacant_pairs(state, 1, rng)
        counts[len(adj[u] & adj[v])] += 1
    mean = sum(k * c for k, c in counts.items()) / sample_size
    return mean, counts


@dataclass
class AtspReport:
    components_checked: int = 0
    non_tree_components: int = 0
    even_weight_components: int = 0
    examples: list[int] = field(default_factory=list)

    @property
    def even_fraction(self) -> float:
        return self.even_weight_components / self.components_checked if self.components_checked else 0.0


def atsp_audit(state: GraphState, exclude_largest: bool = True, max_examples: int = 10) -> AtspReport:
    """Check that each finite component is a tree of triangles with odd weight.

    A component whose edges lie in k_e occupied triangles each has
    T = sum(k_e)/3 triangles and sum(k_e choose 2) shared-edge adjacencies
    between them; it is a tree exactly when the latter equals T - 1.
    Weight-1 components contain no triangle and are trivially fine.
    """
    find, weight = state.find, state.weight
    roots = state.roots()
    skip = None
    if exclude_largest and roots:
        skip = max(roots, key=lambda r: (weight[r], -r))

    incidences: dict[int, int] = defaultdict(int)
    adjacencies: dict[int, int] = defaultdict(int)
    adj = state.adjacency
    for slot, (u, v) in enumerate(state.endpoints):
        root = find(slot)
        if root == skip or weight[root] < 3:
            continue
        k = len(adj[u] & adj[v])
        incidences[root] += k
        adjacencies[root] += k * (k - 1) // 2

    report = AtspReport()
    for root in roots:
        if root == skip:
            continue
        report.components_checked += 1
        bad = False
        if weight[root] % 2 == 0:
            report.even_weight_components += 1
            bad = True
        if root in incidences:
            triangles = incidences[root] // 3
            if adjacencies[root] != triangles - 1:
                report.non_tree_components += 1
                bad = True
        if bad and len(report.examples) < max_examples:
            report.examples.append(state.edge_ids[root])
    return report


def susceptibility_peak(times: Sequence[float], chi: Sequence[float]) -> float:
    """Observation time at which the (replica-averaged) susceptibility is largest."""
    if len(times) != len(chi) or not times:
        raise InvalidArgumentError("times and susceptibilities must be non-empty and aligned")
    return float(times[int(np.argmax(chi))])
