import itertools

import numpy as np
import pytest

from tripercolation.graph_process import GraphState


def build(n, pairs):
    state = GraphState(n)
    for u, v in pairs:
        state.occupy_edge(u, v)
    return state


def random_pairs(n, p, rng):
    pairs = [pair for pair in itertools.combinations(range(n), 2) if rng.random() < p]
    rng.shuffle(pairs)
    return pairs


K4 = list(itertools.combinations(range(4), 2))


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)
