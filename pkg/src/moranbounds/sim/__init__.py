from .process import (
    DEFAULT_MAX_STEPS,
    Configuration,
    Estimate,
    GraphEstimate,
    RunOutcome,
    SimParams,
    estimate_fixation,
    estimate_graph_fixation,
    flip_weights,
    run_to_absorption,
    split_runs,
    step_effective,
)
from .rng import CounterStream

__all__ = [
    "DEFAULT_MAX_STEPS",
    "Configuration",
    "CounterStream",
    "Estimate",
    "GraphEstimate",
    "RunOutcome",
    "SimParams",
    "estimate_fixation",
    "estimate_graph_fixation",
    "flip_weights",
    "run_to_absorption",
    "split_runs",
    "step_effective",
]
