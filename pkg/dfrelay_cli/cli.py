"""Module containing the command-line apps of dfrelay."""

__all__ = [
    "SolveApp",
    "ExperimentApp",
    "OracleCheckApp",
    "GenChannelApp",
    "GapProbeApp",
]

import dataclasses
import warnings

import pandas as pd

from dfrelay.baseline import oracle_small
from dfrelay.dual import SubgradientConfig, duality_gap_probe, solve_dual
from dfrelay.model import ChannelGains, RelayOrder, sum_rate
from dfrelay_sim.config import (
    RunConfig,
    allocation_frame,
    allocation_to_dict,
    trace_frame,
    write_gains,
    write_json,
)
from dfrelay_sim.channel import realization_gains
from dfrelay_sim.experiment import run_experiment, solve_with, summarize
from dfrelay_cli.utils import (
    EXIT_FAILURE,
    EXIT_OK,
    bold_text,
    random_gains,
    write_csv,
)


class SolveApp:
    """CLI app for the "solve-dual", "solve-iterative" and "heuristic" modes."""

    def __init__(
        self,
        solver_name: str,
        gains: ChannelGains,
        cfg: SubgradientConfig,
        output_path: str | None = None,
        csv_path: str | None = None,
        trace_path: str | None = None,
    ):
        self.solver_name = solver_name
        self.gains = gains
        self.order = RelayOrder.from_gains(gains)
        self.cfg = cfg
        self.output_path = output_path
        self.csv_path = csv_path
        self.trace_path = trace_path

    def run(self) -> int:
        if self.solver_name == "dual" and self.trace_path is not None:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", RuntimeWarning)
                alloc, trace = solve_dual(self.gains, self.order, self.cfg)
            converged = trace.converged
            write_csv(trace_frame(trace), self.trace_path)
        else:
            outcome = solve_with(self.solver_name, self.gains, self.order, self.cfg)
            alloc, converged = outcome.allocation, outcome.converged

        result = allocation_to_dict(
            alloc, self.gains, self.order, self.solver_name, converged
        )
        if self.output_path is not None:
            write_json(result, self.output_path)
        if self.csv_path is not None:
            write_csv(allocation_frame(alloc, self.gains, self.order), self.csv_path)
        print(
            bold_text(f"{self.solver_name}:"),
            f"sum rate {result['sum_rate']:.6f} bits per two slots,",
            f"{int(alloc.mode.sum())}/{alloc.K} subcarriers relay-aided,",
            "converged" if converged else "not converged",
        )
        return EXIT_OK


class ExperimentApp:
    """CLI app for the "experiment" mode."""

    def __init__(self, run_config: RunConfig, output_path: str, summary_path: str | None):
        self.run_config = run_config
        self.output_path = output_path
        self.summary_path = summary_path

    def run(self) -> int:
        sweep = self.run_config.experiment
        print(
            f"Running {sweep.realizations} realizations of K={self.run_config.scenario.K} "
            f"subcarriers at {list(sweep.ps_dbw)} dBW with {', '.join(sweep.solvers)}\n"
        )
        results = run_experiment(
            sweep, self.run_config.scenario, self.run_config.solver, progress=True
        )
        write_csv(results, self.output_path)
        summary = summarize(results)
        if self.summary_path is not None:
            write_csv(summary, self.summary_path)
        print(summary.to_string(index=False))
        print(bold_text("Done!"), f"Results written to {self.output_path}")
        return EXIT_OK


class OracleCheckApp:
    """CLI app for the "oracle-check" mode.

    On a small random instance the exhaustive optimum must stay below the
    smallest dual value (plus the grid allowance) and, when the dual solver
    converged, its rate must come within 0.1 of the optimum.
    """

    def __init__(
        self,
        K: int,
        N: int,
        seed: int,
        grid_step: float,
        mean_gain: float,
        cfg: SubgradientConfig,
    ):
        self.gains = random_gains(K, N, seed, mean_gain)
        self.order = RelayOrder.from_gains(self.gains)
        self.grid_step = grid_step
        self.cfg = cfg

    def run(self) -> int:
        oracle = oracle_small(self.gains, self.order, self.grid_step)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            alloc, trace = solve_dual(self.gains, self.order, self.cfg)
        dual_rate = sum_rate(alloc, self.gains, self.order).sum_rate
        below_dual = oracle.sum_rate <= trace.best_dual_value + 0.05
        close = not trace.converged or dual_rate >= oracle.sum_rate - 0.1
        print(f"oracle rate       {oracle.sum_rate:.6f}")
        print(f"dual solver rate  {dual_rate:.6f} (converged: {trace.converged})")
        print(f"smallest d(mu)    {trace.best_dual_value:.6f}")
        if below_dual and close:
            print(bold_text("PASS"))
            return EXIT_OK
        print(bold_text("FAIL"))
        return EXIT_FAILURE


class GenChannelApp:
    """CLI app for the "gen-channel" mode."""

    def __init__(self, run_config: RunConfig, ps_dbw: float, realization: int, output_path: str):
        self.run_config = run_config
        self.ps_dbw = ps_dbw
        self.realization = realization
        self.output_path = output_path

    def run(self) -> int:
        system = self.run_config.system or self.run_config.experiment.system(
            self.run_config.scenario, self.ps_dbw
        )
        gains = realization_gains(self.run_config.scenario, system, self.realization)
        write_gains(gains, self.output_path)
        print(
            bold_text("Done!"),
            f"Gains of realization {self.realization} "
            f"(K={gains.K}, N={gains.N}) written to {self.output_path}",
        )
        return EXIT_OK


class GapProbeApp:
    """CLI app for the "gap-probe" mode: the duality gap bound against K."""

    def __init__(self, run_config: RunConfig, subcarriers: list[int], ps_dbw: float, output_path: str):
        self.run_config = run_config
        self.subcarriers = subcarriers
        self.ps_dbw = ps_dbw
        self.output_path = output_path

    def run(self) -> int:
        records = []
        for K in self.subcarriers:
            scenario = dataclasses.replace(self.run_config.scenario, K=K)
            system = self.run_config.experiment.system(scenario, self.ps_dbw)
            gains = realization_gains(scenario, system, 0)
            report = duality_gap_probe(
                gains, RelayOrder.from_gains(gains), self.run_config.solver
            )
            records.append(
                {
                    "K": K,
                    "dual_value": report.dual_value,
                    "best_primal": report.best_primal,
                    "gap": report.gap,
                    "converged": report.converged,
                }
            )
            print(f"K={K}: gap bound {report.gap:.6g} (converged: {report.converged})")
        write_csv(pd.DataFrame.from_records(records), self.output_path)
        return EXIT_OK
