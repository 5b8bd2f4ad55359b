"""Random graph process G(N, t) with incrementally maintained triangulated components.

Occupied edges are the elements of a union-find structure.  When an edge
{u, v} is occupied, every common neighbour w of u and v closes a triangle,
and the components of {u, w} and {v, w} are merged with the new edge.  The
union-find therefore tracks the connected components of the auxiliary graph
whose vertices are occupied edges and whose adjacency is "lie in a common
occupied triangle".
"""

from __future__ import annotations

import enum
import math
from collections import Counter
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Iterator, NamedTuple, Sequence

import numpy as np

from .errors import ConsistencyError, InvalidArgumentError, InvalidStateError

if TYPE_CHECKING:
    from .component_stats import ComponentHistogram

# Enumerating vacant pairs explicitly is only affordable for small complete graphs.
_ENUMERATION_LIMIT = 5_000_000


def n_pairs(n: int) -> int:
    return n * (n - 1) // 2


def canonical_edge_id(u: int, v: int, n: int) -> int:
    """Lexicographic index of the unordered pair {u, v} among the pairs of ``range(n)``."""
    if u == v:
        raise InvalidArgumentError(f"self-loop {u}-{v}")
    if not (0 <= u < n and 0 <= v < n):
        raise InvalidArgumentError(f"vertex out of range for n={n}: ({u}, {v})")
    if u > v:
        u, v = v, u
    return u * (2 * n - u - 1) // 2 + (v - u - 1)


def edge_endpoints(eid: int, n: int) -> tuple[int, int]:
    """Inverse of :func:`canonical_edge_id`."""
    if not 0 <= eid < n_pairs(n):
        raise InvalidArgumentError(f"edge id {eid} out of range for n={n}")
    b = 2 * n - 1
    u = (b - math.isqrt(b * b - 8 * eid)) // 2
    # isqrt floors, so u can be one too large at row boundaries
    while u * (2 * n - u - 1) // 2 > eid:
        u -= 1
    while (u + 1) * (2 * n - u - 2) // 2 <= eid:
        u += 1
    v = eid - u * (2 * n - u - 1) // 2 + u + 1
    return u, v


class Cherry(NamedTuple):
    left_edge: int
    right_edge: int
    left_weight: int
    right_weight: int


@dataclass
class MergeReport:
    """What happened when one edge was occupied.

    ``cherries`` carries the component weights as they were *before* the
    merge.  ``resulting_weight`` counts every distinct component once, so it
    only equals ``1 + sum(left + right)`` when all touched components differ.
    """

    new_edge: int
    cherries: list[Cherry] = field(default_factory=list)
    resulting_weight: int = 1

    def naive_weight(self) -> int:
        return 1 + sum(c.left_weight + c.right_weight for c in self.cherries)


class ScheduleMode(enum.Enum):
    DYNAMIC = "dynamic"
    STATIC = "static"


class ClockLaw(enum.Enum):
    """Distribution of a single edge's occupation time, in units where sqrt(N) is the scale.

    ``LINEAR``: sqrt(N) * Uniform(0, 1), so P(occupied at t) = min(1, t/sqrt(N)),
    which is G(N, t/sqrt(N)) exactly.  ``EXPONENTIAL``: sqrt(N) * Exp(1), the
    rate-1/sqrt(N) clock, so P(occupied at t) = 1 - exp(-t/sqrt(N)).
    """

    LINEAR = "linear"
    EXPONENTIAL = "exponential"


DEFAULT_LAW = ClockLaw.LINEAR


@dataclass(frozen=True)
class EventSchedule:
    """Occupation law shared by the dynamic and static samplers.

    Both modes only ever use :meth:`conditional_probability`, the chance
    that an edge still vacant at ``t0`` is occupied by ``t1``.  A dynamic run
    chains these over its observation times; a static draw uses a single
    interval.  Since every edge's clock is independent, both produce
    identically distributed edge sets at any fixed time.
    """

    n: int
    mode: ScheduleMode = ScheduleMode.DYNAMIC
    law: ClockLaw = DEFAULT_LAW

    @property
    def scale(self) -> float:
        return math.sqrt(self.n)

    def cumulative(self, t: float) -> float:
        """P(clock <= t)."""
        if t <= 0:
            return 0.0
        if self.law is ClockLaw.EXPONENTIAL:
            return -math.expm1(-t / self.scale)
        return min(1.0, t / self.scale)

    def conditional_probability(self, t0: float, t1: float) -> float:
        if t1 < t0:
            raise InvalidArgumentError(f"interval runs backwards: {t0} -> {t1}")
        if self.law is ClockLaw.EXPONENTIAL:
            return -math.expm1(-(t1 - t0) / self.scale)
        survive = 1.0 - self.cumulative(t0)
        if survive <= 0.0:
            return 1.0
        return (self.cumulative(t1) - self.cumulative(t0)) / survive

    def occupation_times(self, size: int, rng: np.random.Generator) -> np.ndarray:
        """Explicit per-edge clocks (only sensible for small graphs)."""
        if self.law is ClockLaw.EXPONENTIAL:
            return self.scale * rng.exponential(1.0, size=size)
        return self.scale * rng.random(size)


class GraphState:
    """Mutable graph on ``n_vertices`` vertices plus the edge union-find.

    Occupied edges get dense slots in insertion order; ``parent`` and
    ``weight`` are indexed by slot.  ``weight_counts`` maps a component
    weight to the number of components of that weight and is updated on
    every union, so histograms never need a full sweep.
    """

    def __init__(self, n_vertices: int, time: float = 0.0):
        if n_vertices < 1:
            raise InvalidArgumentError(f"n_vertices must be positive, got {n_vertices}")
        self.n_vertices = n_vertices
        self.time = float(time)
        self.adjacency: list[set[int]] = [set() for _ in range(n_vertices)]
        self.slot_of: dict[int, int] = {}
        self.edge_ids: list[int] = []
        self.endpoints: list[tuple[int, int]] = []
        self.parent: list[int] = []
        self.weight: list[int] = []
        self.weight_counts: Counter[int] = Counter()

    # -- basic queries -------------------------------------------------

    @property
    def n_edges(self) -> int:
        return len(self.parent)

    @property
    def occupied(self):
        return self.slot_of.keys()

    def edge_id(self, u: int, v: int) -> int:
        return canonical_edge_id(u, v, self.n_vertices)

    def is_occupied(self, u: int, v: int) -> bool:
        return v in self.adjacency[u]

    def common_neighbors(self, u: int, v: int) -> set[int]:
        return self.adjacency[u] & self.adjacency[v]

    def find(self, slot: int) -> int:
        parent = self.parent
        while parent[slot] != slot:
            parent[slot] = parent[parent[slot]]
            slot = parent[slot]
        return slot

    def root_of(self, u: int, v: int) -> int:
        return self.find(self.slot_of[self.edge_id(u, v)])

    def component_weight(self, u: int, v: int) -> int:
        return self.weight[self.root_of(u, v)]

    def roots(self) -> list[int]:
        return [s for s, p in enumerate(self.parent) if s == p]

    def component_weights(self) -> list[int]:
        """Weights of all components, sorted descending."""
        return sorted(self.weight_counts.elements(), reverse=True)

    def copy(self) -> GraphState:
        other = GraphState.__new__(GraphState)
        other.n_vertices = self.n_vertices
        other.time = self.time
        other.adjacency = [set(a) for a in self.adjacency]
        other.slot_of = dict(self.slot_of)
        other.edge_ids = list(self.edge_ids)
        other.endpoints = list(self.endpoints)
        other.parent = list(self.parent)
        other.weight = list(self.weight)
        other.weight_counts = Counter(self.weight_counts)
        return other

    # -- mutation ------------------------------------------------------

    def _union(self, a: int, b: int) -> int:
        if a == b:
            return a
        weight = self.weight
        if weight[a] < weight[b]:
            a, b = b, a
        wa, wb = weight[a], weight[b]
        counts = self.weight_counts
        for w in (wa, wb):
            counts[w] -= 1
            if not counts[w]:
                del counts[w]
        counts[wa + wb] += 1
        self.parent[b] = a
        weight[a] = wa + wb
        return a

    def _add_edge(self, u: int, v: int, eid: int, report: bool) -> MergeReport | None:
        adj_u, adj_v = self.adjacency[u], self.adjacency[v]
        common = adj_u & adj_v
        slot = len(self.parent)
        self.slot_of[eid] = slot
        self.edge_ids.append(eid)
        self.endpoints.append((u, v) if u < v else (v, u))
        self.parent.append(slot)
        self.weight.append(1)
        self.weight_counts[1] += 1
        adj_u.add(v)
        adj_v.add(u)
        if not common:
            return MergeReport(eid) if report else None

        n = self.n_vertices
        slot_of, find = self.slot_of, self.find
        arms = []
        for w in common:
            left = u * (2 * n - u - 1) // 2 + (w - u - 1) if u < w else w * (2 * n - w - 1) // 2 + (u - w - 1)
            right = v * (2 * n - v - 1) // 2 + (w - v - 1) if v < w else w * (2 * n - w - 1) // 2 + (v - w - 1)
            arms.append((left, right, find(slot_of[left]), find(slot_of[right])))

        rep = None
        if report:
            weight = self.weight
            rep = MergeReport(eid, [Cherry(l, r, weight[rl], weight[rr]) for l, r, rl, rr in arms])
        root = slot
        for _, _, rl, rr in arms:
            root = self._union(root, find(rl))
            root = self._union(root, find(rr))
        if rep is not None:
            rep.resulting_weight = self.weight[root]
        return rep

    def occupy_edge(self, u: int, v: int) -> MergeReport:
        eid = self.edge_id(u, v)
        if eid in self.slot_of:
            raise InvalidStateError(f"edge {{{u}, {v}}} is already occupied")
        return self._add_edge(u, v, eid, report=True)

    def occupy_many(self, pairs) -> None:
        """Occupy vacant edges without building merge reports (hot path)."""
        n = self.n_vertices
        slot_of = self.slot_of
        add = self._add_edge
        for u, v in pairs:
            if u > v:
                u, v = v, u
            eid = u * (2 * n - u - 1) // 2 + (v - u - 1)
            if eid in slot_of:
                raise InvalidStateError(f"edge {{{u}, {v}}} is already occupied")
            add(u, v, eid, False)

    # -- checks --------------------------------------------------------

    def check_invariants(self) -> None:
        """Raise :class:`ConsistencyError` if the bookkeeping is inconsistent."""
        n_adj = sum(len(a) for a in self.adjacency)
        if n_adj != 2 * self.n_edges:
            raise ConsistencyError(f"adjacency holds {n_adj} half-edges for {self.n_edges} edges")
        for eid, slot in self.slot_of.items():
            u, v = self.endpoints[slot]
            if self.edge_ids[slot] != eid or v not in self.adjacency[u] or u not in self.adjacency[v]:
                raise ConsistencyError(f"edge {eid} at slot {slot} not mirrored in adjacency")
        roots = self.roots()
        total = sum(self.weight[r] for r in roots)
        if total != self.n_edges:
            raise ConsistencyError(f"root weights sum to {total}, expected {self.n_edges}")
        if Counter(self.weight[r] for r in roots) != +self.weight_counts:
            raise ConsistencyError("weight_counts out of sync with roots")


def occupy_edge(state: GraphState, u: int, v: int) -> MergeReport:
    return state.occupy_edge(u, v)


# -- sampling ----------------------------------------------------------


def _pair_ids(u: np.ndarray, v: np.ndarray, n: int) -> np.ndarray:
    lo = np.minimum(u, v)
    hi = np.maximum(u, v)
    return lo * (2 * n - lo - 1) // 2 + (hi - lo - 1)


def sample_vacant_pairs(state: GraphState, k: int, rng: np.random.Generator) -> list[tuple[int, int]]:
    """``k`` distinct vacant pairs, uniformly at random and in uniformly random order."""
    n = state.n_vertices
    total = n_pairs(n)
    vacant = total - state.n_edges
    if k > vacant:
        raise InvalidArgumentError(f"cannot draw {k} edges from {vacant} vacant pairs")
    if k == 0:
        return []
    occupied = state.slot_of
    if total <= _ENUMERATION_LIMIT and (state.n_edges + k) * 2 > total:
        iu, iv = np.triu_indices(n, 1)
        ids = np.arange(total, dtype=np.int64)
        free = np.ones(total, dtype=bool)
        if occupied:
            free[np.fromiter(occupied.keys(), dtype=np.int64, count=len(occupied))] = False
        pick = rng.choice(ids[free], size=k, replace=False)
        return list(zip(iu[pick].tolist(), iv[pick].tolist()))

    chosen: dict[int, tuple[int, int]] = {}
    while len(chosen) < k:
        need = k - len(chosen)
        batch = int(need * total / max(vacant - len(chosen), 1) * 1.1) + 16
        u = rng.integers(0, n, size=batch)
        v = rng.integers(0, n - 1, size=batch)
        v += v >= u
        ids = _pair_ids(u, v, n)
        for eid, a, b in zip(ids.tolist(), u.tolist(), v.tolist()):
            if eid in occupied or eid in chosen:
                continue
            chosen[eid] = (a, b) if a < b else (b, a)
            if len(chosen) == k:
                break
    return list(chosen.values())


def advance(state: GraphState, t: float, rng: np.random.Generator, law: ClockLaw = DEFAULT_LAW) -> int:
    """Evolve ``state`` in place from ``state.time`` to ``t``; returns the number of new edges.

    Clocks are i.i.d., so given vacancy at the current time each vacant edge
    is occupied in the interval with the same conditional probability: the
    number of new edges is binomial and, given that number, the set is
    uniform among vacant pairs and its occupation order a uniform permutation.
    """
    if t < state.time:
        raise InvalidArgumentError(f"cannot advance backwards from {state.time} to {t}")
    p = EventSchedule(state.n_vertices, law=ClockLaw(law)).conditional_probability(state.time, t)
    vacant = n_pairs(state.n_vertices) - state.n_edges
    k = int(rng.binomial(vacant, p)) if vacant and p > 0 else 0
    state.occupy_many(sample_vacant_pairs(state, k, rng))
    state.time = float(t)
    return k


def _check_times(init_time: float, t_end: float, observe_at: Sequence[float]) -> list[float]:
    times = [float(t) for t in observe_at]
    if any(b < a for a, b in zip(times, times[1:])):
        raise InvalidArgumentError("observation times must be sorted")
    if t_end < init_time:
        raise InvalidArgumentError(f"t_end={t_end} precedes the initial time {init_time}")
    if times and (times[0] < init_time or times[-1] > t_end):
        raise InvalidArgumentError(f"observation times must lie in [{init_time}, {t_end}]")
    return times


def iter_process(
    n: int,
    init: GraphState | None,
    t_end: float,
    observe_at: Sequence[float],
    seed: int | np.random.Generator,
    law: ClockLaw = DEFAULT_LAW,
) -> Iterator[GraphState]:
    """Yield the live state at each observation time, then evolve to ``t_end``.

    ``init`` is copied.  The yielded object is mutated by the next step, so
    callers must extract what they need before advancing the iterator.
    """
    state = GraphState(n) if init is None else init.copy()
    if state.n_vertices != n:
        raise InvalidArgumentError(f"init has {state.n_vertices} vertices, expected {n}")
    times = _check_times(state.time, t_end, observe_at)
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    for t in times:
        advance(state, t, rng, law)
        yield state
    advance(state, t_end, rng, law)


@dataclass
class Snapshot:
    time: float
    histogram: ComponentHistogram
    edge_count: int


def run_process(
    n: int,
    init: GraphState | None,
    t_end: float,
    observe_at: Sequence[float],
    seed: int,
    law: ClockLaw = DEFAULT_LAW,
) -> list[Snapshot]:
    """Run the process and return a histogram snapshot at every observation time."""
    from .component_stats import histogram

    rng = np.random.default_rng(seed)
    return [
        Snapshot(state.time, histogram(state), state.n_edges)
        for state in iter_process(n, init, t_end, observe_at, rng, law)
    ]


def sample_static(
    n: int, t: float, init: GraphState | None, seed: int, law: ClockLaw = DEFAULT_LAW
) -> GraphState:
    """Static G(N, t): each edge vacant in ``init`` is occupied with the clock's conditional probability.

    With the default linear law and an empty start that probability is t/sqrt(N).
    """
    state = GraphState(n) if init is None else init.copy()
    if state.n_vertices != n:
        raise InvalidArgumentError(f"init has {state.n_vertices} vertices, expected {n}")
    if t < state.time:
        raise InvalidArgumentError(f"t={t} precedes the initial time {state.time}")
    advance(state, t, np.random.default_rng(seed), law)
    return state
