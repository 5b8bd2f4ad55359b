import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import K4, build, random_pairs
from tripercolation.component_stats import histogram
from tripercolation.errors import InvalidArgumentError, InvalidStateError
from tripercolation.graph_process import (
    ClockLaw,
    EventSchedule,
    GraphState,
    advance,
    canonical_edge_id,
    edge_endpoints,
    occupy_edge,
    run_process,
    sample_static,
    sample_vacant_pairs,
)
from tripercolation.reference_oracle import oracle_components


@pytest.mark.parametrize("u, v, n, expected", [(0, 1, 4, 0), (1, 0, 4, 0), (2, 3, 4, 5)])
def test_canonical_edge_id_examples(u, v, n, expected):
    assert canonical_edge_id(u, v, n) == expected


@pytest.mark.parametrize("n", [2, 3, 7, 20])
def test_canonical_edge_id_matches_lexicographic_enumeration(n):
    for index, (u, v) in enumerate(itertools.combinations(range(n), 2)):
        assert canonical_edge_id(u, v, n) == index
        assert canonical_edge_id(v, u, n) == index
        assert edge_endpoints(index, n) == (u, v)


@pytest.mark.parametrize("u, v", [(1, 1), (-1, 2), (0, 4)])
def test_canonical_edge_id_rejects_bad_pairs(u, v):
    with pytest.raises(InvalidArgumentError):
        canonical_edge_id(u, v, 4)


def test_edge_endpoints_large_n():
    n = 10_000
    for u, v in [(0, 1), (0, n - 1), (1, 2), (4998, 9999), (n - 2, n - 1)]:
        assert edge_endpoints(canonical_edge_id(u, v, n), n) == (u, v)


def test_occupy_single_edge():
    state = GraphState(5)
    rep = occupy_edge(state, 0, 1)
    assert rep.cherries == [] and rep.resulting_weight == 1


def test_closing_a_cherry_gives_weight_three():
    state = build(3, [(0, 1), (1, 2)])
    rep = state.occupy_edge(0, 2)
    assert len(rep.cherries) == 1
    c = rep.cherries[0]
    assert (c.left_weight, c.right_weight) == (1, 1)
    assert rep.resulting_weight == 3 == rep.naive_weight()


def test_k4_sixth_edge_merges_everything():
    state = build(4, K4[:-1])
    rep = state.occupy_edge(*K4[-1])
    assert rep.resulting_weight == 6
    assert oracle_components(state) == [6]
    # both cherries touch the same weight-5 component at finite N
    assert len(rep.cherries) == 2
    assert rep.naive_weight() > rep.resulting_weight


def test_occupy_twice_is_rejected():
    state = build(3, [(0, 1)])
    with pytest.raises(InvalidStateError):
        state.occupy_edge(1, 0)


def test_cherry_count_equals_common_neighbours(rng):
    state = GraphState(25)
    for u, v in random_pairs(25, 0.4, rng):
        expected = len(state.adjacency[u] & state.adjacency[v])
        assert len(state.occupy_edge(u, v).cherries) == expected
        state.check_invariants()


@settings(max_examples=60, deadline=None)
@given(n=st.integers(3, 12), p=st.floats(0.1, 1.0), seed=st.integers(0, 2**32 - 1))
def test_partition_is_insertion_order_independent(n, p, seed):
    rng = np.random.default_rng(seed)
    pairs = random_pairs(n, p, rng)
    a = build(n, pairs)
    b = build(n, list(reversed(pairs)))
    perm = list(rng.permutation(len(pairs)))
    c = build(n, [pairs[i] for i in perm])

    def partition(state):
        groups = {}
        for eid, slot in state.slot_of.items():
            groups.setdefault(state.find(slot), set()).add(eid)
        return sorted(sorted(g) for g in groups.values())

    assert partition(a) == partition(b) == partition(c)


@settings(max_examples=80, deadline=None)
@given(n=st.integers(3, 30), p=st.floats(0.0, 1.0), seed=st.integers(0, 2**32 - 1))
def test_union_find_matches_oracle(n, p, seed):
    state = build(n, random_pairs(n, p, np.random.default_rng(seed)))
    state.check_invariants()
    assert state.component_weights() == oracle_components(state)


def test_copy_is_independent():
    state = build(4, K4[:3])
    other = state.copy()
    other.occupy_edge(*K4[3])
    assert state.n_edges == 3 and other.n_edges == 4
    state.check_invariants()
    other.check_invariants()


def test_sample_vacant_pairs_distinct_and_vacant(rng):
    state = build(30, random_pairs(30, 0.3, rng))
    for k in (0, 5, 200, 435 - state.n_edges):
        pairs = sample_vacant_pairs(state, k, rng)
        assert len(set(pairs)) == k
        assert all(u < v and not state.is_occupied(u, v) for u, v in pairs)
    with pytest.raises(InvalidArgumentError):
        sample_vacant_pairs(state, 436 - state.n_edges, rng)


def test_sample_vacant_pairs_uniform():
    # chi-square style check on a small complete graph
    rng = np.random.default_rng(5)
    n = 6
    hits = np.zeros(15)
    for _ in range(3000):
        for u, v in sample_vacant_pairs(GraphState(n), 2, rng):
            hits[canonical_edge_id(u, v, n)] += 1
    expected = 6000 / 15
    chi2 = ((hits - expected) ** 2 / expected).sum()
    assert chi2 < 36.1  # 99.9% quantile, 14 dof


def test_exponential_clock_probabilities():
    sched = EventSchedule(100, law=ClockLaw.EXPONENTIAL)
    assert sched.conditional_probability(0.0, 0.0) == 0.0
    assert sched.conditional_probability(0.0, 1.0) == pytest.approx(1 - math.exp(-0.1), rel=1e-15)
    # memoryless
    assert sched.conditional_probability(3.0, 4.0) == pytest.approx(1 - math.exp(-0.1), rel=1e-14)
    with pytest.raises(InvalidArgumentError):
        sched.conditional_probability(1.0, 0.0)


def test_linear_clock_probabilities():
    sched = EventSchedule(100)
    assert sched.law is ClockLaw.LINEAR
    assert sched.cumulative(1.0) == 0.1
    assert sched.cumulative(50.0) == 1.0
    # P(clock <= 4 | clock > 3) = 0.1 / 0.7
    assert sched.conditional_probability(3.0, 4.0) == pytest.approx(0.1 / 0.7, rel=1e-14)
    assert sched.conditional_probability(12.0, 20.0) == 1.0


@pytest.mark.parametrize("law", list(ClockLaw))
def test_chained_intervals_compose(law):
    sched = EventSchedule(64, law=law)
    times = [0.0, 0.5, 1.7, 3.0, 9.0]
    survive = 1.0
    for a, b in zip(times, times[1:]):
        survive *= 1 - sched.conditional_probability(a, b)
    assert 1 - survive == pytest.approx(sched.cumulative(9.0), rel=1e-13)


def test_run_process_triangle_fills_in():
    snaps = run_process(3, None, 1e6, [1e6], seed=1)
    assert snaps[-1].edge_count == 3
    assert snaps[-1].histogram.counts == {} and snaps[-1].histogram.largest_weight == 3


def test_run_process_observe_at_zero():
    (snap,) = run_process(100, None, 1.0, [0.0], seed=1)
    assert snap.edge_count == 0 and snap.histogram.counts == {}


def test_run_process_deterministic():
    a = run_process(200, None, 1.0, [0.3, 0.6, 1.0], seed=9)
    b = run_process(200, None, 1.0, [0.3, 0.6, 1.0], seed=9)
    assert [(s.edge_count, s.histogram) for s in a] == [(s.edge_count, s.histogram) for s in b]
    assert [s.edge_count for s in a] == sorted(s.edge_count for s in a)


@pytest.mark.parametrize("observe", [[0.5, 0.2], [-0.1], [2.0]])
def test_run_process_rejects_bad_observation_times(observe):
    with pytest.raises(InvalidArgumentError):
        run_process(10, None, 1.0, observe, seed=0)


def test_run_process_does_not_touch_init():
    init = build(5, [(0, 1)])
    run_process(5, init, 100.0, [100.0], seed=0)
    assert init.n_edges == 1


@pytest.mark.parametrize("law", list(ClockLaw))
def test_edge_density_law_at_n_10k(law):
    n, t = 10_000, 0.5
    (snap,) = run_process(n, None, t, [t], seed=11, law=law)
    total = n * (n - 1) // 2
    p = EventSchedule(n, law=law).cumulative(t)
    mean, sd = total * p, math.sqrt(total * p * (1 - p))
    assert abs(snap.edge_count - mean) < 3 * sd
    assert snap.edge_count / (0.5 * n ** 1.5) == pytest.approx(0.5, abs=0.01)


def test_sample_static_unchanged_at_init_time():
    init = build(6, [(0, 1), (1, 2), (0, 2)])
    out = sample_static(6, 0.0, init, seed=3)
    assert out.n_edges == 3 and out is not init


@pytest.mark.parametrize("law", list(ClockLaw))
def test_sample_static_infinite_time_fills_triangle(law):
    out = sample_static(3, math.inf, None, seed=3, law=law)
    assert out.n_edges == 3 and histogram(out).largest_weight == 3


def test_sample_static_rejects_past_time():
    init = GraphState(5, time=1.0)
    with pytest.raises(InvalidArgumentError):
        sample_static(5, 0.5, init, seed=0)


@pytest.mark.parametrize("law", list(ClockLaw))
def test_dynamic_and_static_modes_agree_in_law(law):
    # edge counts after a multi-step run vs a single static draw vs explicit clocks
    n, t, reps = 40, 3.0, 600
    total = n * (n - 1) // 2
    rng = np.random.default_rng(77)
    dynamic = [run_process(n, None, t, [0.7, 1.9, t], seed=int(s), law=law)[-1].edge_count
               for s in rng.integers(0, 2**31, reps)]
    static = [sample_static(n, t, None, seed=int(s), law=law).n_edges for s in rng.integers(0, 2**31, reps)]
    sched = EventSchedule(n, law=law)
    clocks = [(sched.occupation_times(total, rng) <= t).sum() for _ in range(reps)]
    p = sched.cumulative(t)
    sd_mean = math.sqrt(total * p * (1 - p) / reps)
    for sample in (dynamic, static, clocks):
        assert abs(np.mean(sample) - total * p) < 4 * sd_mean
        assert np.var(sample, ddof=1) == pytest.approx(total * p * (1 - p), rel=0.25)


def test_advance_backwards_rejected(rng):
    state = GraphState(10, time=1.0)
    with pytest.raises(InvalidArgumentError):
        advance(state, 0.5, rng)
