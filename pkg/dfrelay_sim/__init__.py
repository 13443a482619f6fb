"""
dfrelay_sim package initialization.

Channel draws, energy metrics, Monte Carlo power sweeps and file formats
around the dfrelay solvers.
"""

from .channel import (
    DEFAULT_RELAY_POSITIONS,
    Scenario,
    LinkPowers,
    lognormal_mean,
    distance,
    realization_rng,
    gen_channel,
    draw_link_powers,
    realization_gains,
)
from .metrics import RESULT_COLUMNS, MetricsRow, dbw_to_watt, watt_to_dbw, tetib
from .experiment import (
    SOLVER_NAMES,
    PowerSweep,
    SolveOutcome,
    solve_with,
    run_realization,
    run_experiment,
    summarize,
)
from .config import (
    ConfigError,
    RunConfig,
    parse_config,
    load_config,
    read_gains,
    write_gains,
    allocation_to_dict,
    allocation_frame,
    trace_frame,
    write_json,
)

__all__ = [
    "DEFAULT_RELAY_POSITIONS",
    "Scenario",
    "LinkPowers",
    "lognormal_mean",
    "distance",
    "realization_rng",
    "gen_channel",
    "draw_link_powers",
    "realization_gains",
    "RESULT_COLUMNS",
    "MetricsRow",
    "dbw_to_watt",
    "watt_to_dbw",
    "tetib",
    "SOLVER_NAMES",
    "PowerSweep",
    "SolveOutcome",
    "solve_with",
    "run_realization",
    "run_experiment",
    "summarize",
    "ConfigError",
    "RunConfig",
    "parse_config",
    "load_config",
    "read_gains",
    "write_gains",
    "allocation_to_dict",
    "allocation_frame",
    "trace_frame",
    "write_json",
]
