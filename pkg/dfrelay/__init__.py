"""
dfrelay package initialization.

Resource allocation for OFDM links aided by several decode-and-forward relays:
closed-form per-subcarrier Lagrangian maximizers, a dual decomposition solver,
a coordinate ascent solver with fixed modes, and reference allocations.
"""

from .__version__ import __version__
from .errors import (
    DimensionError,
    UnboundedDualError,
    SolverError,
    InstanceTooLargeError,
)
from .model import (
    SystemConfig,
    ChannelGains,
    RelayOrder,
    Allocation,
    RateReport,
    normalize_gains,
    direct_dominant,
    snr_mrc,
    rate_relay,
    rate_direct,
    sum_rate,
    check_feasible,
)
from .persubcarrier import (
    SolutionCase,
    DualVector,
    SubcarrierSolution,
    solve_direct,
    gbar,
    solve_relay_fixed_b,
    solve_subcarrier,
)
from .dual import (
    SubgradientConfig,
    FixedModes,
    DualTrace,
    GapReport,
    subgradient_step,
    maximize_lagrangian,
    solve_dual,
    duality_gap_probe,
    onto_budgets,
)
from .iterative import (
    ModeState,
    IterativeTrace,
    compute_d_set,
    init_modes,
    update_modes,
    carry_over,
    solve_iterative,
)
from .baseline import (
    OracleResult,
    heuristic_ra,
    oracle_small,
    oracle_convex_fixed,
    oracle_lagrangian_fixed,
)

__all__ = [
    "__version__",
    "DimensionError",
    "UnboundedDualError",
    "SolverError",
    "InstanceTooLargeError",
    "SystemConfig",
    "ChannelGains",
    "RelayOrder",
    "Allocation",
    "RateReport",
    "normalize_gains",
    "direct_dominant",
    "snr_mrc",
    "rate_relay",
    "rate_direct",
    "sum_rate",
    "check_feasible",
    "SolutionCase",
    "DualVector",
    "SubcarrierSolution",
    "solve_direct",
    "gbar",
    "solve_relay_fixed_b",
    "solve_subcarrier",
    "SubgradientConfig",
    "FixedModes",
    "DualTrace",
    "GapReport",
    "subgradient_step",
    "maximize_lagrangian",
    "solve_dual",
    "duality_gap_probe",
    "onto_budgets",
    "ModeState",
    "IterativeTrace",
    "compute_d_set",
    "init_modes",
    "update_modes",
    "carry_over",
    "solve_iterative",
    "OracleResult",
    "heuristic_ra",
    "oracle_small",
    "oracle_convex_fixed",
    "oracle_lagrangian_fixed",
]
