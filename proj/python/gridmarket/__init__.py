"""Grid-aware day-ahead market for aggregator flexibility on radial feeders."""

from ._core import (
    Demand,
    Feeder,
    InputError,
    Scenario,
    SolverError,
    build_matrices,
    compare,
    load_feeder,
    run,
    solve_distflow,
    step1,
    step2,
    two_node_voltage,
)

__all__ = [
    "Demand",
    "Feeder",
    "InputError",
    "Scenario",
    "SolverError",
    "build_matrices",
    "compare",
    "load_feeder",
    "run",
    "solve_distflow",
    "step1",
    "step2",
    "two_node_voltage",
]
