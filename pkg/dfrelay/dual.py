"""Dual decomposition solver with projected subgradient updates."""

__all__ = [
    "SubgradientConfig",
    "FixedModes",
    "DualTrace",
    "GapReport",
    "step_size",
    "subgradient_step",
    "maximize_lagrangian",
    "onto_budgets",
    "solve_dual",
    "duality_gap_probe",
]

import sys
import warnings
from dataclasses import dataclass, field

import numpy as np
from tqdm import tqdm

from dfrelay.errors import DimensionError, SolverError
from dfrelay.model import (
    Allocation,
    ChannelGains,
    RelayOrder,
    check_feasible,
    sum_rate,
)
from dfrelay.persubcarrier import (
    MU_FLOOR,
    DualVector,
    best_response,
    fixed_response,
)


@dataclass(frozen=True)
class SubgradientConfig:
    """Parameters of the subgradient loop.

    Attributes:
        epsilon: stop once the iterate is feasible and mu^T (1 - g) < epsilon.
        q_offset: Q in the step size (1 + Q) / (q + Q).
        max_iterations: hard cap on the number of Lagrangian maximizations.
        mu_floor: smallest admissible source multiplier.
        record_history: keep every multiplier vector in the trace.
    """

    epsilon: float = 0.1
    q_offset: int = 50
    max_iterations: int = 20000
    mu_floor: float = MU_FLOOR
    record_history: bool = False

    def __post_init__(self):
        if self.epsilon <= 0:
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")
        if self.q_offset < 0:
            raise ValueError(f"q_offset must be non-negative, got {self.q_offset}")
        if self.max_iterations < 1:
            raise ValueError(
                f"max_iterations must be at least 1, got {self.max_iterations}"
            )
        if self.mu_floor <= 0:
            raise ValueError(f"mu_floor must be positive, got {self.mu_floor}")


@dataclass(frozen=True, eq=False)
class FixedModes:
    """Mode and cut of every subcarrier, held fixed during a dual solve."""

    mode: np.ndarray
    cut: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "mode", np.array(self.mode, dtype=np.int8))
        object.__setattr__(self, "cut", np.array(self.cut, dtype=np.int64))

    def check(self, gains: ChannelGains):
        if self.mode.shape != (gains.K,) or self.cut.shape != (gains.K,):
            raise DimensionError(
                f"mode and cut must have length {gains.K}, got "
                f"{self.mode.shape} and {self.cut.shape}"
            )
        if np.any((self.cut < 0) | (self.cut >= gains.N)):
            raise ValueError(f"cut entries must lie in [0, {gains.N - 1}]")


@dataclass
class DualTrace:
    """What happened during one subgradient run."""

    iterations: int = 0
    converged: bool = False
    slack_gap_history: list[float] = field(default_factory=list)
    dual_value_history: list[float] = field(default_factory=list)
    mu_history: list[DualVector] = field(default_factory=list)
    best_feasible: Allocation | None = None
    best_feasible_rate: float = -np.inf
    best_dual_value: float = np.inf
    dual_value: float = np.nan
    final_mu: DualVector | None = None


@dataclass(frozen=True)
class GapReport:
    dual_value: float
    best_primal: float
    gap: float
    converged: bool


def step_size(q: int, q_offset: int) -> float:
    """Diminishing step (1 + Q) / (q + Q), equal to 1 at q = 1."""
    return (1.0 + q_offset) / (q + q_offset)


def subgradient_step(
    mu: DualVector, slack, q: int, cfg: SubgradientConfig
) -> DualVector:
    """Projected step mu <- [mu - delta_q (1 - g)]^+.

    The source multiplier is kept at or above cfg.mu_floor.
    """
    if q < 1:
        raise ValueError(f"iteration index must be at least 1, got {q}")
    slack = np.asarray(slack, dtype=float)
    if slack.shape != (mu.N + 1,):
        raise DimensionError(
            f"slack must have {mu.N + 1} entries, got {slack.shape[0]}"
        )
    values = np.maximum(mu.as_array() - step_size(q, cfg.q_offset) * slack, 0.0)
    values[0] = max(values[0], cfg.mu_floor)
    return DualVector.from_array(values)


def maximize_lagrangian(
    mu: DualVector,
    gains: ChannelGains,
    order: RelayOrder,
    fixed_modes: FixedModes | None = None,
    mu_floor: float = MU_FLOOR,
) -> tuple[Allocation, float]:
    """Lagrangian maximizer and dual function value d(mu).

    With fixed_modes None every subcarrier picks its best mode and cut;
    otherwise modes and cuts are taken from fixed_modes.
    """
    if fixed_modes is None:
        block = best_response(mu, gains, order, mu_floor)
    else:
        fixed_modes.check(gains)
        block = fixed_response(mu, gains, order, fixed_modes.mode, fixed_modes.cut, mu_floor)
    dual_value = float(block.value.sum() + mu.as_array().sum())
    return block.allocation(), dual_value


def onto_budgets(alloc: Allocation) -> Allocation:
    """Scale the source powers and each relay's powers down onto their unit budgets.

    Modes and cuts are kept; budgets already met are left untouched.
    """
    p_s = alloc.p_s / max(1.0, float(alloc.p_s.sum()))
    p_r = alloc.p_r / np.maximum(1.0, alloc.p_r.sum(axis=1, keepdims=True))
    return Allocation(alloc.mode, alloc.cut, p_s, p_r)


def _run_subgradient(
    gains: ChannelGains,
    order: RelayOrder,
    cfg: SubgradientConfig,
    fixed_modes: FixedModes | None,
    progress: bool,
    initial_mu: DualVector | None,
) -> tuple[Allocation, DualTrace]:
    trace = DualTrace()
    mu = initial_mu if initial_mu is not None else DualVector.ones(gains.N)
    alloc, dual_value = maximize_lagrangian(mu, gains, order, fixed_modes, cfg.mu_floor)
    q = 1
    with tqdm(
        total=cfg.max_iterations, desc="Subgradient", disable=not progress
    ) as pbar:
        while True:
            trace.iterations += 1
            pbar.update()
            feasible, slack = check_feasible(alloc)
            gap = float(mu.as_array() @ slack)
            trace.slack_gap_history.append(gap)
            trace.dual_value_history.append(dual_value)
            if cfg.record_history:
                trace.mu_history.append(mu)
            trace.best_dual_value = min(trace.best_dual_value, dual_value)
            candidate = alloc if feasible else onto_budgets(alloc)
            rate = sum_rate(candidate, gains, order).sum_rate
            if rate > trace.best_feasible_rate:
                trace.best_feasible_rate = rate
                trace.best_feasible = candidate
            if feasible and gap < cfg.epsilon:
                trace.converged = True
                break
            if trace.iterations >= cfg.max_iterations:
                break
            mu = subgradient_step(mu, slack, q, cfg)
            q += 1
            alloc, dual_value = maximize_lagrangian(
                mu, gains, order, fixed_modes, cfg.mu_floor
            )
    trace.dual_value = dual_value
    trace.final_mu = mu
    return alloc, trace


def solve_dual(
    gains: ChannelGains,
    order: RelayOrder,
    cfg: SubgradientConfig | None = None,
    fixed_modes: FixedModes | None = None,
    progress: bool = False,
    initial_mu: DualVector | None = None,
) -> tuple[Allocation, DualTrace]:
    """Maximize the sum rate through its dual.

    Starts from all-ones multipliers, maximizes the Lagrangian, and stops on
    the first feasible iterate with mu^T (1 - g) < epsilon.

    Args:
        gains: normalized channel gains.
        order: relay ordering of gains.
        cfg: loop parameters, defaults to SubgradientConfig().
        fixed_modes: fixed modes and cuts, or None to optimize them too.
        progress: show a tqdm progress bar.
        initial_mu: starting multipliers instead of all ones.

    Returns:
        The allocation and the trace. When max_iterations is reached a
        RuntimeWarning is emitted and trace.best_feasible is returned with
        trace.converged False: the highest-rate iterate once each iterate
        is scaled onto the budgets with onto_budgets.

    Raises:
        SolverError: no iterate had a finite sum rate.
    """
    cfg = cfg or SubgradientConfig()
    alloc, trace = _run_subgradient(gains, order, cfg, fixed_modes, progress, initial_mu)
    if trace.converged:
        return alloc, trace
    if trace.best_feasible is None:
        message = (
            f"no feasible allocation with a finite rate found within "
            f"{cfg.max_iterations} subgradient iterations"
        )
        sys.stderr.write(message + "\n")
        raise SolverError(message)
    warnings.warn(
        f"subgradient loop stopped after {trace.iterations} iterations without "
        f"reaching epsilon={cfg.epsilon}, returning the best feasible iterate",
        RuntimeWarning,
    )
    return trace.best_feasible, trace


def duality_gap_probe(
    gains: ChannelGains,
    order: RelayOrder,
    cfg: SubgradientConfig | None = None,
) -> GapReport:
    """Smallest dual value seen against the best feasible rate seen.

    The difference is an upper bound on the duality gap and never negative.
    The primal side scores every iterate after onto_budgets.
    """
    cfg = cfg or SubgradientConfig()
    _, trace = _run_subgradient(gains, order, cfg, None, False, None)
    return GapReport(
        dual_value=trace.best_dual_value,
        best_primal=trace.best_feasible_rate,
        gap=trace.best_dual_value - trace.best_feasible_rate,
        converged=trace.converged,
    )
