"""Coordinate ascent over modes and cuts.

Powers are optimized by the dual solver with modes and cuts held fixed; the
modes and cuts are then updated from the powers, and the two steps alternate
until the assignment stops changing. Each step never lowers the sum rate.
"""

__all__ = [
    "ModeState",
    "IterativeTrace",
    "compute_d_set",
    "init_modes",
    "update_modes",
    "carry_over",
    "solve_iterative",
]

import warnings
from dataclasses import dataclass, field

import numpy as np

from dfrelay.dual import FixedModes, SubgradientConfig, solve_dual
from dfrelay.errors import DimensionError, SolverError
from dfrelay.model import (
    Allocation,
    ChannelGains,
    RelayOrder,
    direct_dominant,
    rate_direct,
    rate_relay,
    snr_mrc,
    sum_rate,
)

# bottleneck test slack, the SNR and the decoding bound are equal at the optimum
_CUT_RTOL = 1e-9
_CUT_ATOL = 1e-12


@dataclass(frozen=True, eq=False)
class ModeState:
    """Mode and cut assignment of one outer iteration.

    d_set holds the subcarriers pinned to direct mode.
    """

    d_set: frozenset[int]
    mode: np.ndarray
    cut: np.ndarray
    iteration: int = 1

    def __post_init__(self):
        object.__setattr__(self, "mode", np.array(self.mode, dtype=np.int8))
        object.__setattr__(self, "cut", np.array(self.cut, dtype=np.int64))

    def same_assignment(self, other: "ModeState") -> bool:
        return bool(
            np.array_equal(self.mode, other.mode) and np.array_equal(self.cut, other.cut)
        )

    def as_fixed_modes(self) -> FixedModes:
        return FixedModes(self.mode, self.cut)


@dataclass
class IterativeTrace:
    rates: list[float] = field(default_factory=list)
    states: list[ModeState] = field(default_factory=list)
    inner_converged: list[bool] = field(default_factory=list)
    converged: bool = False

    @property
    def iterations(self) -> int:
        return len(self.rates)


def compute_d_set(gains: ChannelGains, order: RelayOrder | None = None) -> frozenset[int]:
    """Subcarriers where the direct link is at least as strong as every source-relay link."""
    del order
    return frozenset(int(k) for k in np.flatnonzero(direct_dominant(gains)))


def init_modes(gains: ChannelGains, order: RelayOrder | None = None) -> ModeState:
    """Direct mode on the direct-dominant subcarriers, strongest relay alone elsewhere."""
    d_set = compute_d_set(gains, order)
    mode = np.ones(gains.K, dtype=np.int8)
    mode[list(d_set)] = 0
    return ModeState(d_set, mode, np.full(gains.K, gains.N - 1))


def update_modes(
    state: ModeState, alloc: Allocation, gains: ChannelGains, order: RelayOrder
) -> ModeState:
    """Next assignment given the powers optimized for the current one.

    A relay subcarrier falls back to direct mode when direct mode would give
    a strictly higher rate with the same source power. Otherwise its cut moves
    to the smallest position whose relay still decodes at the current SNR,
    which keeps the rate and lets more relays assist.

    Raises:
        DimensionError: state, allocation and gains disagree on K or N.
        SolverError: a relay below the cut of a relay subcarrier carries power.
    """
    if state.mode.shape != (gains.K,) or (alloc.K, alloc.N) != (gains.K, gains.N):
        raise DimensionError("state, allocation and gains disagree on K or N")
    mode = state.mode.copy()
    cut = state.cut.copy()
    sorted_sr = np.take_along_axis(gains.g_sr.T, order.order, axis=1)
    for k in np.flatnonzero(state.mode == 1):
        if k in state.d_set:
            mode[k] = 0
            continue
        b = int(state.cut[k])
        if np.any(alloc.p_r[order.order[k, :b], k] != 0):
            raise SolverError(f"relays below the cut of subcarrier {k} carry power")
        relay = rate_relay(alloc, gains, order, k, b)
        direct = rate_direct(alloc.p_s[k], gains.g_sd[k])
        if relay < direct:
            mode[k] = 0
            continue
        gamma = snr_mrc(alloc, gains, order, k, b)
        threshold = alloc.p_s[k] * sorted_sr[k] * (1.0 + _CUT_RTOL) + _CUT_ATOL
        candidates = np.flatnonzero((gamma <= threshold) & (sorted_sr[k] > gains.g_sd[k]))
        if candidates.size:
            cut[k] = min(int(candidates[0]), b)
    return ModeState(state.d_set, mode, cut, state.iteration + 1)


def carry_over(alloc: Allocation, state: ModeState) -> Allocation:
    """Previous powers under the next assignment.

    Relay power is dropped on subcarriers that moved to direct mode. The
    result is feasible and, by the rules of update_modes, never scores below
    alloc.
    """
    p_r = np.where(state.mode[None, :] == 1, alloc.p_r, 0.0)
    return Allocation(state.mode, state.cut, alloc.p_s, p_r)


def solve_iterative(
    gains: ChannelGains,
    order: RelayOrder,
    cfg: SubgradientConfig | None = None,
    progress: bool = False,
) -> tuple[Allocation, IterativeTrace]:
    """Alternate fixed-mode power solves and mode updates until the assignment repeats.

    Whenever a fixed-mode solve scores below the previous powers carried over
    to the new assignment, the carried powers are kept, so trace.rates never
    decreases. At most K (N + 1) + 10 outer iterations are run; if the
    assignment still changes after that a RuntimeWarning is emitted and the
    best allocation seen is returned with trace.converged False.
    """
    cfg = cfg or SubgradientConfig()
    trace = IterativeTrace()
    state = init_modes(gains, order)
    best, best_rate = None, -np.inf
    carried = None
    for _ in range(gains.K * (gains.N + 1) + 10):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            alloc, inner = solve_dual(gains, order, cfg, state.as_fixed_modes(), progress)
        rate = sum_rate(alloc, gains, order).sum_rate
        if carried is not None:
            carried_rate = sum_rate(carried, gains, order).sum_rate
            if carried_rate > rate:
                alloc, rate = carried, carried_rate
        trace.rates.append(rate)
        trace.states.append(state)
        trace.inner_converged.append(inner.converged)
        if rate > best_rate:
            best, best_rate = alloc, rate
        following = update_modes(state, alloc, gains, order)
        if following.same_assignment(state):
            trace.converged = True
            return alloc, trace
        carried = carry_over(alloc, following)
        state = following
    warnings.warn(
        f"mode assignment still changing after {trace.iterations} outer iterations, "
        "returning the best allocation seen",
        RuntimeWarning,
    )
    return best, trace
