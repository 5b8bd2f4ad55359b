"""Triangle percolation on the mean-field random graph process: simulation and exact theory."""

from .analytic import (
    InitialDistribution,
    TheoryResult,
    Tolerances,
    critical_time,
    eval_V,
    theory,
    w_at_zero,
)
from .component_stats import atsp_audit, cherry_census, histogram, observables, state_observables
from .graph_process import GraphState, canonical_edge_id, occupy_edge, run_process, sample_static

__all__ = [
    "GraphState",
    "InitialDistribution",
    "TheoryResult",
    "Tolerances",
    "atsp_audit",
    "canonical_edge_id",
    "cherry_census",
    "critical_time",
    "eval_V",
    "histogram",
    "observables",
    "occupy_edge",
    "run_process",
    "sample_static",
    "state_observables",
    "theory",
    "w_at_zero",
]
__version__ = "0.1.0"
