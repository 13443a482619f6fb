"""JSON configuration, gains files and allocation dumps."""

__all__ = [
    "WORKERS_ENV",
    "ConfigError",
    "ScenarioSection",
    "SystemSection",
    "SolverSection",
    "ExperimentSection",
    "ConfigFile",
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

import dataclasses
import json
import os
from dataclasses import dataclass
from typing import Any, TypedDict

import numpy as np
import pandas as pd

from dfrelay.dual import DualTrace, SubgradientConfig
from dfrelay.errors import DimensionError
from dfrelay.model import (
    Allocation,
    ChannelGains,
    RelayOrder,
    SystemConfig,
    check_feasible,
    sum_rate,
)
from dfrelay_sim.channel import Scenario
from dfrelay_sim.experiment import PowerSweep

WORKERS_ENV = "DFRELAY_WORKERS"


class ConfigError(ValueError):
    """Malformed configuration or gains file."""


class ScenarioSection(TypedDict, total=False):
    source_pos: list[float]
    dest_pos: list[float]
    relay_pos: list[list[float]]
    pathloss_exponent: float
    shadowing_sigma_db: float
    tap_count: int
    tap_decay: float
    K: int
    seed: int


class SystemSection(TypedDict, total=False):
    K: int
    N: int
    source_power: float
    relay_powers: list[float]
    noise_variance: float
    slot_duration: float


class SolverSection(TypedDict, total=False):
    epsilon: float
    q_offset: int
    max_iterations: int
    mu_floor: float
    record_history: bool


class ExperimentSection(TypedDict, total=False):
    ps_dbw: list[float]
    realizations: int
    solvers: list[str]
    workers: int
    noise_variance: float
    slot_duration: float


class ConfigFile(TypedDict, total=False):
    scenario: ScenarioSection
    system: SystemSection
    solver: SolverSection
    experiment: ExperimentSection


@dataclass(frozen=True)
class RunConfig:
    scenario: Scenario
    solver: SubgradientConfig
    experiment: PowerSweep
    system: SystemConfig | None = None


def _build(section_name: str, cls, values: Any):
    """Instantiate a config dataclass from one JSON section."""
    if values is None:
        values = {}
    if not isinstance(values, dict):
        raise ConfigError(f'section "{section_name}" must be a JSON object')
    known = {f.name for f in dataclasses.fields(cls)}
    unknown = sorted(set(values) - known)
    if unknown:
        raise ConfigError(f'unknown key(s) {unknown} in section "{section_name}"')
    try:
        return cls(**values)
    except DimensionError:
        raise
    except (TypeError, ValueError) as error:
        raise ConfigError(f'invalid section "{section_name}": {error}') from error


def parse_config(data: ConfigFile, seed: int | None = None) -> RunConfig:
    """Build the run configuration from a parsed config file.

    Args:
        data: the JSON document.
        seed: overrides scenario.seed when given.

    Raises:
        ConfigError: unknown sections or keys, wrong types or values.
        DimensionError: the system section disagrees with the scenario.
    """
    if not isinstance(data, dict):
        raise ConfigError("the configuration must be a JSON object")
    unknown = sorted(set(data) - set(ConfigFile.__annotations__))
    if unknown:
        raise ConfigError(f"unknown section(s) {unknown}")

    scenario = _build("scenario", Scenario, data.get("scenario"))
    if seed is not None:
        scenario = scenario.with_seed(seed)
    solver = _build("solver", SubgradientConfig, data.get("solver"))

    experiment_values = data.get("experiment")
    if experiment_values is not None and not isinstance(experiment_values, dict):
        raise ConfigError('section "experiment" must be a JSON object')
    experiment_values = dict(experiment_values or {})
    if "workers" not in experiment_values and os.environ.get(WORKERS_ENV):
        try:
            experiment_values["workers"] = int(os.environ[WORKERS_ENV])
        except ValueError as error:
            raise ConfigError(f"{WORKERS_ENV} must be an integer") from error
    experiment = _build("experiment", PowerSweep, experiment_values)

    system = None
    if data.get("system") is not None:
        system = _build("system", SystemConfig, data["system"])
        if (system.K, system.N) != (scenario.K, scenario.N):
            raise DimensionError(
                f"system is {system.K}x{system.N} but the scenario has "
                f"{scenario.K} subcarriers and {scenario.N} relays"
            )
    return RunConfig(scenario, solver, experiment, system)


def load_config(path: str, seed: int | None = None) -> RunConfig:
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = json.load(f)
    except json.JSONDecodeError as error:
        raise ConfigError(f"{path} is not valid JSON: {error}") from error
    return parse_config(data, seed)


def read_gains(path: str) -> ChannelGains:
    """Normalized gains stored as {"g_sd": [...], "g_sr": [[...]], "g_rd": [[...]]}."""
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = json.load(f)
    except json.JSONDecodeError as error:
        raise ConfigError(f"{path} is not valid JSON: {error}") from error
    if not isinstance(data, dict) or set(data) != {"g_sd", "g_sr", "g_rd"}:
        raise ConfigError(f'{path} must hold exactly the keys "g_sd", "g_sr", "g_rd"')
    try:
        g_sd = np.asarray(data["g_sd"], dtype=float)
        g_sr = np.asarray(data["g_sr"], dtype=float)
        g_rd = np.asarray(data["g_rd"], dtype=float)
    except (TypeError, ValueError) as error:
        raise DimensionError(f"{path} holds ragged or non-numeric gains") from error
    try:
        return ChannelGains(g_sd, g_sr, g_rd)
    except DimensionError:
        raise
    except ValueError as error:
        raise ConfigError(f"{path}: {error}") from error


def write_gains(gains: ChannelGains, path: str):
    write_json(
        {
            "g_sd": gains.g_sd.tolist(),
            "g_sr": gains.g_sr.tolist(),
            "g_rd": gains.g_rd.tolist(),
        },
        path,
    )


def allocation_to_dict(
    alloc: Allocation,
    gains: ChannelGains,
    order: RelayOrder,
    solver: str,
    converged: bool,
) -> dict:
    rates = sum_rate(alloc, gains, order)
    feasible, slack = check_feasible(alloc)
    return {
        "solver": solver,
        "K": alloc.K,
        "N": alloc.N,
        "mode": alloc.mode.tolist(),
        "cut": alloc.cut.tolist(),
        "p_s": alloc.p_s.tolist(),
        "p_r": alloc.p_r.tolist(),
        "rates": rates.per_subcarrier.tolist(),
        "sum_rate": rates.sum_rate,
        "feasible": feasible,
        "slack": slack.tolist(),
        "converged": bool(converged),
    }


def allocation_frame(
    alloc: Allocation, gains: ChannelGains, order: RelayOrder
) -> pd.DataFrame:
    """One row per subcarrier: mode, cut, assisting relays, powers and rate."""
    rates = sum_rate(alloc, gains, order)
    frame = pd.DataFrame(
        {
            "k": np.arange(alloc.K),
            "mode": alloc.mode,
            "cut": alloc.cut,
            "assisting": [
                " ".join(str(r) for r in order.assisting(k, alloc.cut[k]))
                if alloc.mode[k] == 1
                else ""
                for k in range(alloc.K)
            ],
            "p_s": alloc.p_s,
        }
    )
    for r in range(alloc.N):
        frame[f"p_r_{r}"] = alloc.p_r[r]
    frame["rate_bpts"] = rates.per_subcarrier
    return frame


def trace_frame(trace: DualTrace) -> pd.DataFrame:
    return pd.DataFrame(
        {
            "iteration": np.arange(1, trace.iterations + 1),
            "slack_gap": trace.slack_gap_history,
            "dual_value": trace.dual_value_history,
        }
    )


def write_json(data: dict, path: str):
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(data, f, indent=2)
