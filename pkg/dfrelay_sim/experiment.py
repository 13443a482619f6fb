"""Monte Carlo power sweeps comparing the allocation solvers."""

__all__ = [
    "SOLVER_NAMES",
    "PowerSweep",
    "SolveOutcome",
    "solve_with",
    "run_realization",
    "run_experiment",
    "summarize",
]

import functools
import sys
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np
import pandas as pd
from tqdm import tqdm

from dfrelay.baseline import heuristic_ra
from dfrelay.dual import SubgradientConfig, solve_dual
from dfrelay.errors import SolverError, UnboundedDualError
from dfrelay.iterative import solve_iterative
from dfrelay.model import (
    Allocation,
    ChannelGains,
    RelayOrder,
    SystemConfig,
    normalize_gains,
    sum_rate,
)
from dfrelay_sim.channel import Scenario, draw_link_powers
from dfrelay_sim.metrics import RESULT_COLUMNS, MetricsRow, dbw_to_watt, tetib

SOLVER_NAMES = ("dual", "iterative", "heuristic")


@dataclass(frozen=True)
class PowerSweep:
    """Power sweep definition. Relays use the same budget as the source."""

    ps_dbw: tuple[float, ...] = (10.0, 20.0, 30.0, 40.0, 50.0)
    realizations: int = 100
    solvers: tuple[str, ...] = SOLVER_NAMES
    workers: int = 1
    noise_variance: float = 1e-5
    slot_duration: float = 1e-3

    def __post_init__(self):
        object.__setattr__(self, "ps_dbw", tuple(float(p) for p in self.ps_dbw))
        object.__setattr__(self, "solvers", tuple(self.solvers))
        unknown = set(self.solvers) - set(SOLVER_NAMES)
        if unknown:
            raise ValueError(
                f"unknown solver(s) {sorted(unknown)}, expected a subset of {SOLVER_NAMES}"
            )
        if not self.ps_dbw or not self.solvers:
            raise ValueError("an experiment needs at least one power point and solver")
        if self.realizations < 1 or self.workers < 1:
            raise ValueError("realizations and workers must be positive")

    def system(self, scenario: Scenario, ps_dbw: float) -> SystemConfig:
        return SystemConfig.equal_powers(
            scenario.K,
            scenario.N,
            float(dbw_to_watt(ps_dbw)),
            noise_variance=self.noise_variance,
            slot_duration=self.slot_duration,
        )


@dataclass(frozen=True, eq=False)
class SolveOutcome:
    allocation: Allocation
    converged: bool


def solve_with(
    name: str, gains: ChannelGains, order: RelayOrder, cfg: SubgradientConfig
) -> SolveOutcome:
    """Run one of the named solvers; nonconvergence is reported, not warned."""
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        if name == "dual":
            alloc, trace = solve_dual(gains, order, cfg)
            return SolveOutcome(alloc, trace.converged)
        if name == "iterative":
            alloc, trace = solve_iterative(gains, order, cfg)
            return SolveOutcome(alloc, trace.converged and all(trace.inner_converged))
        if name == "heuristic":
            return SolveOutcome(heuristic_ra(gains, order), True)
    raise ValueError(f"unknown solver {name!r}, expected one of {SOLVER_NAMES}")


def run_realization(
    realization: int,
    sweep: PowerSweep,
    scenario: Scenario,
    cfg: SubgradientConfig,
) -> list[MetricsRow]:
    """Every solver at every power point on one channel realization."""
    links = draw_link_powers(scenario, realization)
    rows = []
    for ps_dbw in sweep.ps_dbw:
        config = sweep.system(scenario, ps_dbw)
        gains = normalize_gains(links.c_sd, links.c_sr, links.c_rd, config)
        order = RelayOrder.from_gains(gains)
        for name in sweep.solvers:
            try:
                outcome = solve_with(name, gains, order, cfg)
            except (SolverError, UnboundedDualError) as error:
                sys.stderr.write(
                    f"{name} failed on realization {realization} at {ps_dbw} dBW: {error}\n"
                )
                rows.append(
                    MetricsRow(name, ps_dbw, realization, np.nan, np.nan, False)
                )
                continue
            rates = sum_rate(outcome.allocation, gains, order)
            energy = (
                tetib(outcome.allocation, rates, config)
                if rates.sum_rate > 0
                else np.inf
            )
            rows.append(
                MetricsRow(
                    name, ps_dbw, realization, rates.sum_rate, energy, outcome.converged
                )
            )
    return rows


def run_experiment(
    sweep: PowerSweep,
    scenario: Scenario,
    cfg: SubgradientConfig | None = None,
    progress: bool = False,
) -> pd.DataFrame:
    """Run the sweep over all realizations.

    Realizations draw from independent seed streams, so the table is the same
    for any number of workers. Rows are sorted by realization, then power,
    then solver in the order given by the sweep.
    """
    cfg = cfg or SubgradientConfig()
    task = functools.partial(run_realization, sweep=sweep, scenario=scenario, cfg=cfg)
    realizations = range(sweep.realizations)
    if sweep.workers > 1:
        with ProcessPoolExecutor(max_workers=sweep.workers) as executor:
            batches = list(
                tqdm(
                    executor.map(task, realizations),
                    total=sweep.realizations,
                    desc="Realizations",
                    disable=not progress,
                )
            )
    else:
        batches = [
            task(r)
            for r in tqdm(realizations, desc="Realizations", disable=not progress)
        ]
    records = [row.as_record() for batch in batches for row in batch]
    return pd.DataFrame.from_records(records, columns=RESULT_COLUMNS)


def summarize(results: pd.DataFrame) -> pd.DataFrame:
    """Average sum rate and energy per bit per solver and power point."""
    grouped = results.groupby(["solver", "ps_dbw"], sort=False)
    summary = grouped.agg(
        sum_rate_bpts=("sum_rate_bpts", "mean"),
        tetib_j_per_bit=("tetib_j_per_bit", "mean"),
        converged_fraction=("converged", "mean"),
        realizations=("realization", "count"),
    )
    return summary.reset_index()
