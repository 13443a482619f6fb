"""Closed-form maximizers of the per-subcarrier Lagrangian.

For fixed multipliers the Lagrangian splits over subcarriers. Direct mode is a
water-filling step. Relay mode with a fixed cut reduces to a one dimensional
problem in the combined relay contribution x, solved in closed form in three
regimes (relays useless, all relays priced, some relay free).

Everything is computed for all subcarriers at once on (N, K) arrays; the
scalar functions are views of the vectorized ones.
"""

__all__ = [
    "MU_FLOOR",
    "SolutionCase",
    "DualVector",
    "SubcarrierSolution",
    "SubcarrierBlock",
    "solve_direct",
    "gbar",
    "solve_relay_fixed_b",
    "solve_subcarrier",
    "best_response",
    "fixed_response",
]

from dataclasses import dataclass
from enum import Enum

import numpy as np

from dfrelay.errors import DimensionError, UnboundedDualError
from dfrelay.model import (
    LOG2E,
    Allocation,
    ChannelGains,
    RelayOrder,
    direct_dominant,
    rate_direct,
)

MU_FLOOR = 1e-12


class SolutionCase(Enum):
    DIRECT = 0
    RELAY_CASE1 = 1
    RELAY_CASE2 = 2
    RELAY_CASE3 = 3


@dataclass(frozen=True, eq=False)
class DualVector:
    """Multipliers of the source budget and of each relay budget."""

    mu_s: float
    mu_r: np.ndarray

    def __post_init__(self):
        mu_r = np.array(self.mu_r, dtype=float).reshape(-1)
        mu_s = float(self.mu_s)
        if not (np.isfinite(mu_s) and np.all(np.isfinite(mu_r))):
            raise ValueError("multipliers must be finite")
        if mu_s < 0 or np.any(mu_r < 0):
            raise ValueError("multipliers must be non-negative")
        mu_r.setflags(write=False)
        object.__setattr__(self, "mu_s", mu_s)
        object.__setattr__(self, "mu_r", mu_r)

    @classmethod
    def ones(cls, N: int) -> "DualVector":
        return cls(1.0, np.ones(N))

    @classmethod
    def from_array(cls, values) -> "DualVector":
        values = np.asarray(values, dtype=float)
        return cls(values[0], values[1:])

    @property
    def N(self) -> int:
        return self.mu_r.size

    def as_array(self) -> np.ndarray:
        return np.concatenate(([self.mu_s], self.mu_r))


@dataclass(frozen=True, eq=False)
class SubcarrierSolution:
    """Maximizer of the Lagrangian on one subcarrier.

    `x_opt`, `alpha` and `beta` are diagnostics of the relay mode regimes:
    the optimal combined relay contribution and the KKT multipliers of the
    two SNR constraints. They are NaN in direct mode.
    """

    t: int
    b: int
    p_s: float
    p_r: np.ndarray
    lagrangian_value: float
    case: SolutionCase
    x_opt: float
    alpha: float
    beta: float


@dataclass(frozen=True, eq=False)
class SubcarrierBlock:
    """Lagrangian maximizers of all subcarriers, one column per subcarrier."""

    t: np.ndarray
    b: np.ndarray
    p_s: np.ndarray
    p_r: np.ndarray
    value: np.ndarray
    case: np.ndarray
    x_opt: np.ndarray
    alpha: np.ndarray
    beta: np.ndarray

    def merge(self, other: "SubcarrierBlock", mask: np.ndarray) -> "SubcarrierBlock":
        """Columns of `other` where mask is set, of self elsewhere."""
        return SubcarrierBlock(
            t=np.where(mask, other.t, self.t),
            b=np.where(mask, other.b, self.b),
            p_s=np.where(mask, other.p_s, self.p_s),
            p_r=np.where(mask[None, :], other.p_r, self.p_r),
            value=np.where(mask, other.value, self.value),
            case=np.where(mask, other.case, self.case),
            x_opt=np.where(mask, other.x_opt, self.x_opt),
            alpha=np.where(mask, other.alpha, self.alpha),
            beta=np.where(mask, other.beta, self.beta),
        )

    def solution(self, k: int) -> SubcarrierSolution:
        return SubcarrierSolution(
            t=int(self.t[k]),
            b=int(self.b[k]),
            p_s=float(self.p_s[k]),
            p_r=self.p_r[:, k].copy(),
            lagrangian_value=float(self.value[k]),
            case=SolutionCase(int(self.case[k])),
            x_opt=float(self.x_opt[k]),
            alpha=float(self.alpha[k]),
            beta=float(self.beta[k]),
        )

    def allocation(self) -> Allocation:
        return Allocation(self.t, self.b, self.p_s, self.p_r)


def _check_mu_s(mu_s: float, mu_floor: float):
    if mu_s < mu_floor:
        raise UnboundedDualError(
            f"source multiplier {mu_s!r} is below {mu_floor!r}, "
            "the Lagrangian has no maximizer"
        )


def _check_instance(mu: DualVector, gains: ChannelGains, order: RelayOrder):
    if mu.N != gains.N or (order.K, order.N) != (gains.K, gains.N):
        raise DimensionError(
            f"multipliers for {mu.N} relays, gains {gains.K}x{gains.N} and "
            f"order {order.K}x{order.N} (K x N) do not match"
        )


def _safe(values: np.ndarray) -> np.ndarray:
    """Replace non-positive entries by 1 so they can be used as divisors."""
    return np.where(values > 0, values, 1.0)


def _water_level(level, gain) -> np.ndarray:
    """[level - 1/gain]^+ elementwise, zero where the gain is zero."""
    gain = np.asarray(gain, dtype=float)
    return np.where(gain > 0, np.maximum(level - 1.0 / _safe(gain), 0.0), 0.0)


def _direct_block(mu: DualVector, gains: ChannelGains, cut: np.ndarray) -> SubcarrierBlock:
    p_s = 2.0 * _water_level(LOG2E / mu.mu_s, gains.g_sd)
    value = rate_direct(p_s, gains.g_sd) - mu.mu_s * p_s
    nan = np.full(gains.K, np.nan)
    return SubcarrierBlock(
        t=np.zeros(gains.K, dtype=np.int8),
        b=np.asarray(cut, dtype=np.int64),
        p_s=p_s,
        p_r=np.zeros((gains.N, gains.K)),
        value=value,
        case=np.full(gains.K, SolutionCase.DIRECT.value),
        x_opt=np.zeros(gains.K),
        alpha=nan,
        beta=nan,
    )


def _relay_block(
    mu: DualVector, gains: ChannelGains, order: RelayOrder, cut: np.ndarray
) -> SubcarrierBlock:
    g_sd, g_rd = gains.g_sd, gains.g_rd
    columns = np.arange(gains.K)
    mu_s = mu.mu_s
    mu_r = mu.mu_r[:, None]

    # relays with no path to the destination never carry power
    live = (order.rank >= cut[None, :]) & (g_rd > 0)
    free = live & (mu_r == 0)
    priced = live & (mu_r > 0)
    has_free = free.any(axis=0)

    g_tilde = np.where(priced, g_rd / _safe(mu_r), 0.0).sum(axis=0)
    g_srb = gains.g_sr[order.order[columns, cut], columns]
    delta_g = g_srb - g_sd

    relays_off = delta_g <= 0
    case3 = ~relays_off & has_free
    case1 = ~relays_off & ~has_free & (mu_s * g_tilde <= g_sd)
    case2 = ~relays_off & ~has_free & ~case1

    level = LOG2E / mu_s
    safe_tilde = _safe(g_tilde)
    p_s = np.where(case1, _water_level(level, g_sd), 0.0)
    p_s = np.where(relays_off | case3, _water_level(level, g_srb), p_s)
    case2_price = np.where(case2, mu_s + delta_g / safe_tilde, 1.0)
    p_s = np.where(case2, _water_level(LOG2E / case2_price, g_srb), p_s)
    x_opt = np.where(case2 | case3, p_s * delta_g, 0.0)

    p_r = np.where(priced & case2, g_rd / (_safe(mu_r) * safe_tilde) ** 2 * x_opt, 0.0)
    free_gain = _safe(np.where(free, g_rd, 0.0).sum(axis=0))
    p_r = np.where(free & case3, g_rd * x_opt / free_gain**2, p_r)

    gamma = p_s * g_sd + np.sqrt(p_r * g_rd).sum(axis=0) ** 2
    rate = np.log2(1.0 + np.minimum(gamma, p_s * g_srb))
    value = rate - mu_s * p_s - (mu_r * p_r).sum(axis=0)

    srb_alpha = np.where(g_srb > 0, mu_s / _safe(g_srb), 0.0)
    alpha = np.select(
        [case1, case2],
        [np.where(g_sd > 0, 0.0, srb_alpha), (mu_s - g_sd / safe_tilde) / _safe(g_srb)],
        srb_alpha,
    )
    beta = np.select(
        [case1, case2],
        [np.where(g_sd > 0, mu_s / _safe(g_sd), 0.0), 1.0 / safe_tilde],
        0.0,
    )
    case = np.select(
        [case2, case3],
        [SolutionCase.RELAY_CASE2.value, SolutionCase.RELAY_CASE3.value],
        SolutionCase.RELAY_CASE1.value,
    )
    return SubcarrierBlock(
        t=np.ones(gains.K, dtype=np.int8),
        b=np.asarray(cut, dtype=np.int64),
        p_s=p_s,
        p_r=p_r,
        value=value,
        case=case,
        x_opt=x_opt,
        alpha=alpha,
        beta=beta,
    )


def best_response(
    mu: DualVector,
    gains: ChannelGains,
    order: RelayOrder,
    mu_floor: float = MU_FLOOR,
) -> SubcarrierBlock:
    """Maximize the Lagrangian of every subcarrier over mode, cut and powers.

    Cuts at or below the last relay that hears the source worse than the
    destination are skipped: relay mode there cannot beat direct mode.
    Direct mode wins exact ties, and the smallest cut wins ties among cuts.

    Raises:
        UnboundedDualError: mu_s is below mu_floor.
        DimensionError: mu, gains and order disagree.
    """
    _check_mu_s(mu.mu_s, mu_floor)
    _check_instance(mu, gains, order)
    K, N = gains.K, gains.N
    direct = _direct_block(mu, gains, np.full(K, N - 1))
    sorted_sr = np.take_along_axis(gains.g_sr.T, order.order, axis=1)

    best, reached = None, np.zeros(K, dtype=bool)
    for b in range(N):
        eligible = sorted_sr[:, b] > gains.g_sd
        if not eligible.any():
            continue
        candidate = _relay_block(mu, gains, order, np.full(K, b))
        if best is None:
            best = candidate
        else:
            better = eligible & (~reached | (candidate.value > best.value))
            best = best.merge(candidate, better)
        reached |= eligible
    if best is None:
        return direct
    return direct.merge(best, reached & (best.value > direct.value))


def fixed_response(
    mu: DualVector,
    gains: ChannelGains,
    order: RelayOrder,
    mode: np.ndarray,
    cut: np.ndarray,
    mu_floor: float = MU_FLOOR,
) -> SubcarrierBlock:
    """Maximize the Lagrangian over powers only, with modes and cuts given.

    Subcarriers flagged relay but dominated by the direct link are solved in
    direct mode.
    """
    _check_mu_s(mu.mu_s, mu_floor)
    _check_instance(mu, gains, order)
    mode = np.asarray(mode)
    cut = np.asarray(cut, dtype=np.int64)
    if mode.shape != (gains.K,) or cut.shape != (gains.K,):
        raise DimensionError(f"mode and cut must have length {gains.K}")
    direct = _direct_block(mu, gains, cut)
    relay_mask = (mode == 1) & ~direct_dominant(gains)
    if not relay_mask.any():
        return direct
    relay = _relay_block(mu, gains, order, cut)
    return direct.merge(relay, relay_mask)


def solve_direct(
    mu_s: float, g_sd_k: float, mu_floor: float = MU_FLOOR
) -> tuple[float, float]:
    """Water-filling in direct mode.

    Returns:
        p_s = 2 [log2(e)/mu_s - 1/G_sd]^+ and the Lagrangian value
        2 log2(1 + p_s G_sd / 2) - mu_s p_s.

    Examples:
        >>> solve_direct(1.0, 0.5)
        (0.0, 0.0)
    """
    _check_mu_s(mu_s, mu_floor)
    if g_sd_k < 0:
        raise ValueError(f"gain must be non-negative, got {g_sd_k}")
    g_sd = np.array([float(g_sd_k)])
    p_s = 2.0 * _water_level(LOG2E / mu_s, g_sd)
    value = rate_direct(p_s, g_sd) - mu_s * p_s
    return float(p_s[0]), float(value[0])


def gbar(
    mu: DualVector, gains: ChannelGains, order: RelayOrder, k: int, b: int
) -> float | None:
    """Σ G_rd / mu_r over the assisting relays of subcarrier k.

    Returns None when an assisting relay has a zero multiplier, in which case
    the sum is unbounded.
    """
    if not 0 <= k < gains.K or not 0 <= b < gains.N:
        raise IndexError(f"subcarrier {k} / cut {b} out of range")
    _check_instance(mu, gains, order)
    relays = order.assisting(k, b)
    live = relays[gains.g_rd[relays, k] > 0]
    if np.any(mu.mu_r[live] == 0):
        return None
    return float(np.sum(gains.g_rd[live, k] / mu.mu_r[live]))


def solve_relay_fixed_b(
    mu: DualVector,
    gains: ChannelGains,
    order: RelayOrder,
    k: int,
    b: int,
    mu_floor: float = MU_FLOOR,
) -> SubcarrierSolution:
    """Lagrangian maximizer of subcarrier k in relay mode with cut b."""
    _check_mu_s(mu.mu_s, mu_floor)
    if not 0 <= b < gains.N:
        raise IndexError(f"cut position {b} out of range for N={gains.N}")
    _check_instance(mu, gains, order)
    block = _relay_block(mu, gains.subcarrier(k), order.subcarrier(k), np.array([b]))
    return block.solution(0)


def solve_subcarrier(
    mu: DualVector,
    gains: ChannelGains,
    order: RelayOrder,
    k: int,
    mu_floor: float = MU_FLOOR,
) -> SubcarrierSolution:
    """Best mode, cut and powers for subcarrier k."""
    _check_instance(mu, gains, order)
    block = best_response(mu, gains.subcarrier(k), order.subcarrier(k), mu_floor)
    return block.solution(0)
