"""dfrelay app launcher module."""

__all__ = ["DfrelayAppLauncher", "build_parser", "cli_main"]

import argparse
import os

import dfrelay_cli.cli as cli
from dfrelay.errors import DimensionError, SolverError, UnboundedDualError
from dfrelay_sim.channel import realization_gains
from dfrelay_sim.config import (
    ConfigError,
    RunConfig,
    load_config,
    parse_config,
    read_gains,
)
from dfrelay_cli.utils import (
    EXIT_CONFIG,
    EXIT_DIMENSION,
    EXIT_FAILURE,
    EXIT_SOLVER,
    bold_text,
    print_error,
)

SOLVE_MODES = {
    "solve-dual": "dual",
    "solve-iterative": "iterative",
    "heuristic": "heuristic",
}


def get_usage():
    """Show usage of the "dfrelay" app."""
    return (
        bold_text("python -m dfrelay_cli {mode} [options]")
        + f"\n\nexample: {bold_text('python -m dfrelay_cli experiment --config configs/sweep.json --out results.csv')}"
    )


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--seed",
        type=int,
        default=None,
        help="Seed overriding scenario.seed of the config (instance seed for oracle-check).",
    )
    common.add_argument(
        "--config", default=None, help="JSON configuration file."
    )

    parser = argparse.ArgumentParser(prog="dfrelay", usage=get_usage())
    modes = parser.add_subparsers(dest="mode", required=True)

    for mode, solver in SOLVE_MODES.items():
        sub = modes.add_parser(
            mode, parents=[common], help=f"Allocate one instance with the {solver} solver."
        )
        sub.add_argument("--gains", default=None, help="Normalized gains JSON file.")
        sub.add_argument(
            "--ps-dbw",
            type=float,
            default=20.0,
            help="Source and relay budget in dBW when gains are drawn from --config.",
        )
        sub.add_argument(
            "--realization", type=int, default=0, help="Realization drawn from --config."
        )
        sub.add_argument("--out", default=None, help="Allocation JSON output.")
        sub.add_argument("--csv", default=None, help="Per-subcarrier allocation CSV.")
        if solver == "dual":
            sub.add_argument("--trace", default=None, help="Subgradient trace CSV.")

    experiment = modes.add_parser(
        "experiment", parents=[common], help="Monte Carlo power sweep."
    )
    experiment.add_argument("--out", required=True, help="Per-realization results CSV.")
    experiment.add_argument("--summary", default=None, help="Averaged results CSV.")

    oracle = modes.add_parser(
        "oracle-check", parents=[common], help="Compare the dual solver with the grid oracle."
    )
    oracle.add_argument("--k", type=int, default=2, help="Number of subcarriers (<= 4).")
    oracle.add_argument("--n", type=int, default=1, help="Number of relays (<= 2).")
    oracle.add_argument("--grid", type=float, default=0.05, help="Power grid step.")
    oracle.add_argument("--mean-gain", type=float, default=10.0, help="Mean normalized gain.")

    channel = modes.add_parser(
        "gen-channel", parents=[common], help="Draw one realization and save its gains."
    )
    channel.add_argument("--ps-dbw", type=float, default=20.0, help="Budget in dBW.")
    channel.add_argument("--realization", type=int, default=0, help="Realization index.")
    channel.add_argument("--out", required=True, help="Gains JSON output.")

    gap = modes.add_parser(
        "gap-probe", parents=[common], help="Duality gap bound for growing K."
    )
    gap.add_argument("--k", type=int, nargs="+", default=[16, 64, 256], help="Subcarrier counts.")
    gap.add_argument("--ps-dbw", type=float, default=20.0, help="Budget in dBW.")
    gap.add_argument("--out", required=True, help="Results CSV.")
    return parser


class DfrelayAppLauncher:
    """dfrelay app launcher, connecting argparse to the cli apps."""

    def __init__(self):
        self.mode = ""
        self.seed = None
        self.config = None

    def run(self) -> int:
        """Run the selected app and map failures to exit codes."""
        try:
            return self.make_app().run()
        except ConfigError as error:
            print_error(str(error))
            return EXIT_CONFIG
        except DimensionError as error:
            print_error(f"dimension mismatch: {error}")
            return EXIT_DIMENSION
        except (SolverError, UnboundedDualError) as error:
            print_error(f"solver failure: {error}")
            return EXIT_SOLVER
        except ValueError as error:
            print_error(f"invalid argument: {error}")
            return EXIT_CONFIG
        except OSError as error:
            print_error(str(error))
            return EXIT_FAILURE

    def load_run_config(self) -> RunConfig:
        if self.config is None:
            return parse_config({}, self.seed)
        if not os.path.isfile(self.config):
            raise ConfigError(f"{self.config} is not a file")
        return load_config(self.config, self.seed)

    def make_app(self):
        run_config = self.load_run_config()
        if self.mode in SOLVE_MODES:
            if self.gains is not None:
                gains = read_gains(self.gains)
            elif self.config is not None:
                gains = realization_gains(
                    run_config.scenario,
                    run_config.system
                    or run_config.experiment.system(run_config.scenario, self.ps_dbw),
                    self.realization,
                )
            else:
                raise ConfigError("either --gains or --config is required")
            return cli.SolveApp(
                SOLVE_MODES[self.mode],
                gains,
                run_config.solver,
                self.out,
                self.csv,
                getattr(self, "trace", None),
            )
        if self.mode == "experiment":
            return cli.ExperimentApp(run_config, self.out, self.summary)
        if self.mode == "oracle-check":
            return cli.OracleCheckApp(
                self.k,
                self.n,
                self.seed if self.seed is not None else 0,
                self.grid,
                self.mean_gain,
                run_config.solver,
            )
        if self.mode == "gen-channel":
            return cli.GenChannelApp(run_config, self.ps_dbw, self.realization, self.out)
        if self.mode == "gap-probe":
            return cli.GapProbeApp(run_config, self.k, self.ps_dbw, self.out)
        raise ConfigError(f'The mode "{self.mode}" is not supported')


def cli_main(argv: list[str] | None = None) -> int:
    """Parse argv, run the selected mode and return the exit code.

    Usage errors exit through argparse with status 2.
    """
    launcher = DfrelayAppLauncher()
    build_parser().parse_args(argv, namespace=launcher)
    return launcher.run()
