"""Domain types and closed-form link quantities of a relay aided OFDM link.

The source transmits on K subcarriers. Each subcarrier either runs in direct
mode (the source sends twice, two time slots) or in relay mode, where the
relays that decoded the first slot forward it and the destination combines
everything with maximal ratio combining. All powers are fractions of the
per-node budget, all gains are normalized by the noise variance and the
transmit budget of the node that uses them.
"""

__all__ = [
    "LOG2E",
    "FEASIBILITY_TOL",
    "SystemConfig",
    "ChannelGains",
    "RelayOrder",
    "Allocation",
    "RateReport",
    "normalize_gains",
    "direct_dominant",
    "mrc_snr",
    "snr_mrc",
    "rate_relay",
    "rate_direct",
    "relay_rates",
    "sum_rate",
    "check_feasible",
]

from dataclasses import dataclass

import numpy as np

from dfrelay.errors import DimensionError

LOG2E = float(np.log2(np.e))
FEASIBILITY_TOL = 1e-9


@dataclass(frozen=True)
class SystemConfig:
    """Static parameters of one link.

    Attributes:
        K: number of subcarriers.
        N: number of relays.
        source_power: source budget P_s in watts.
        relay_powers: one budget P_ri per relay, in watts.
        noise_variance: receiver noise variance in watts.
        slot_duration: duration of one time slot in seconds.
    """

    K: int
    N: int
    source_power: float
    relay_powers: tuple[float, ...]
    noise_variance: float = 1e-5
    slot_duration: float = 1e-3

    def __post_init__(self):
        if self.K < 1 or self.N < 1:
            raise ValueError(
                f"K and N must be positive, got K={self.K} and N={self.N}"
            )
        relay_powers = tuple(float(p) for p in np.atleast_1d(self.relay_powers))
        object.__setattr__(self, "relay_powers", relay_powers)
        if len(relay_powers) != self.N:
            raise DimensionError(
                f"expected {self.N} relay powers, got {len(relay_powers)}"
            )
        if self.source_power <= 0 or min(relay_powers) <= 0:
            raise ValueError("source and relay powers must be positive")
        if self.noise_variance <= 0:
            raise ValueError(
                f"noise variance must be positive, got {self.noise_variance}"
            )
        if self.slot_duration <= 0:
            raise ValueError(
                f"slot duration must be positive, got {self.slot_duration}"
            )

    @classmethod
    def equal_powers(cls, K: int, N: int, power: float, **kwargs) -> "SystemConfig":
        """Same budget for the source and every relay."""
        return cls(K, N, power, (power,) * N, **kwargs)


def _as_gain_array(name: str, values, ndim: int) -> np.ndarray:
    array = np.array(values, dtype=float)
    if ndim == 2:
        array = np.atleast_2d(array)
    if array.ndim != ndim:
        raise DimensionError(f"{name} must have {ndim} dimension(s), got {array.ndim}")
    if not np.all(np.isfinite(array)) or np.any(array < 0):
        raise ValueError(f"{name} must hold finite non-negative gains")
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class ChannelGains:
    """Normalized power gains.

    Attributes:
        g_sd: source to destination gains, shape (K,).
        g_sr: source to relay gains, shape (N, K).
        g_rd: relay to destination gains, shape (N, K).
    """

    g_sd: np.ndarray
    g_sr: np.ndarray
    g_rd: np.ndarray

    def __post_init__(self):
        g_sd = _as_gain_array("g_sd", self.g_sd, 1)
        g_sr = _as_gain_array("g_sr", self.g_sr, 2)
        g_rd = _as_gain_array("g_rd", self.g_rd, 2)
        if g_sr.shape != g_rd.shape or g_sr.shape[1] != g_sd.size:
            raise DimensionError(
                f"gain shapes disagree: g_sd {g_sd.shape}, g_sr {g_sr.shape}, "
                f"g_rd {g_rd.shape}"
            )
        object.__setattr__(self, "g_sd", g_sd)
        object.__setattr__(self, "g_sr", g_sr)
        object.__setattr__(self, "g_rd", g_rd)

    @property
    def K(self) -> int:
        return self.g_sd.size

    @property
    def N(self) -> int:
        return self.g_sr.shape[0]

    def subcarrier(self, k: int) -> "ChannelGains":
        """Single subcarrier view, as a K=1 instance."""
        _check_subcarrier(k, self.K)
        return ChannelGains(
            self.g_sd[k : k + 1], self.g_sr[:, k : k + 1], self.g_rd[:, k : k + 1]
        )


@dataclass(frozen=True, eq=False)
class RelayOrder:
    """Relays of every subcarrier sorted by ascending source-relay gain.

    `order[k, i]` is the relay at position i on subcarrier k and
    `rank[r, k]` the position of relay r. Ties keep the lower relay index
    first.
    """

    order: np.ndarray

    def __post_init__(self):
        order = np.array(self.order, dtype=np.int64)
        if order.ndim != 2:
            raise DimensionError("relay order must be a (K, N) array")
        K, N = order.shape
        if not np.all(np.sort(order, axis=1) == np.arange(N)):
            raise ValueError("every row of the relay order must be a permutation")
        rank = np.empty((N, K), dtype=np.int64)
        rank[order, np.arange(K)[:, None]] = np.arange(N)[None, :]
        order.setflags(write=False)
        rank.setflags(write=False)
        object.__setattr__(self, "order", order)
        object.__setattr__(self, "rank", rank)

    @classmethod
    def from_gains(cls, gains: ChannelGains) -> "RelayOrder":
        return cls(np.argsort(gains.g_sr.T, axis=1, kind="stable"))

    @property
    def K(self) -> int:
        return self.order.shape[0]

    @property
    def N(self) -> int:
        return self.order.shape[1]

    def assisting(self, k: int, b: int) -> np.ndarray:
        """Relays that decode subcarrier k when the cut is at position b."""
        return self.order[k, b:]

    def bottleneck(self, k: int, b: int) -> int:
        return int(self.order[k, b])

    def subcarrier(self, k: int) -> "RelayOrder":
        _check_subcarrier(k, self.K)
        return RelayOrder(self.order[k : k + 1])


@dataclass(frozen=True, eq=False)
class Allocation:
    """Mode, cut and power fractions of every subcarrier.

    Attributes:
        mode: 0 for direct, 1 for relay mode, shape (K,).
        cut: position of the weakest assisting relay, shape (K,).
        p_s: source power fractions, shape (K,).
        p_r: relay power fractions, shape (N, K).
    """

    mode: np.ndarray
    cut: np.ndarray
    p_s: np.ndarray
    p_r: np.ndarray

    def __post_init__(self):
        mode = np.array(self.mode, dtype=np.int8)
        cut = np.array(self.cut, dtype=np.int64)
        p_s = np.array(self.p_s, dtype=float)
        p_r = np.atleast_2d(np.array(self.p_r, dtype=float))
        K = p_s.size
        if p_s.ndim != 1 or mode.shape != (K,) or cut.shape != (K,):
            raise DimensionError("mode, cut and p_s must be vectors of one length")
        if p_r.shape[1] != K:
            raise DimensionError(
                f"p_r has {p_r.shape[1]} subcarriers, expected {K}"
            )
        if np.any((mode != 0) & (mode != 1)):
            raise ValueError("mode entries must be 0 (direct) or 1 (relay)")
        if np.any((cut < 0) | (cut >= p_r.shape[0])):
            raise ValueError(f"cut entries must lie in [0, {p_r.shape[0] - 1}]")
        for name, value in (("mode", mode), ("cut", cut), ("p_s", p_s), ("p_r", p_r)):
            value.setflags(write=False)
            object.__setattr__(self, name, value)

    @classmethod
    def zeros(cls, K: int, N: int) -> "Allocation":
        return cls(
            np.zeros(K), np.full(K, N - 1), np.zeros(K), np.zeros((N, K))
        )

    @property
    def K(self) -> int:
        return self.p_s.size

    @property
    def N(self) -> int:
        return self.p_r.shape[0]


@dataclass(frozen=True, eq=False)
class RateReport:
    """Rates in bits per two time slots."""

    per_subcarrier: np.ndarray
    sum_rate: float


def _check_subcarrier(k: int, K: int):
    if not 0 <= k < K:
        raise IndexError(f"subcarrier {k} out of range for K={K}")


def _check_index(k: int, b: int, K: int, N: int):
    _check_subcarrier(k, K)
    if not 0 <= b < N:
        raise IndexError(f"cut position {b} out of range for N={N}")


def _check_dimensions(alloc: Allocation, gains: ChannelGains, order: RelayOrder):
    if (alloc.K, alloc.N) != (gains.K, gains.N) or (order.K, order.N) != (
        gains.K,
        gains.N,
    ):
        raise DimensionError(
            f"allocation is {alloc.K}x{alloc.N}, gains {gains.K}x{gains.N} and "
            f"order {order.K}x{order.N} (K x N)"
        )


def normalize_gains(c_sd, c_sr, c_rd, config: SystemConfig) -> ChannelGains:
    """Scale raw |C|² link powers into normalized gains.

    Args:
        c_sd: source-destination power gains, shape (K,).
        c_sr: source-relay power gains, shape (N, K).
        c_rd: relay-destination power gains, shape (N, K).
        config: budgets and noise variance.

    Returns:
        G_sd = P_s c_sd / σ², G_sr = P_s c_sr / σ², G_rd = P_ri c_rd / σ².

    Raises:
        DimensionError: shapes do not match the config.
        ValueError: a link power is negative.
    """
    c_sd = np.asarray(c_sd, dtype=float)
    c_sr = np.atleast_2d(np.asarray(c_sr, dtype=float))
    c_rd = np.atleast_2d(np.asarray(c_rd, dtype=float))
    expected = (config.N, config.K)
    if c_sd.shape != (config.K,) or c_sr.shape != expected or c_rd.shape != expected:
        raise DimensionError(
            f"link powers must have shapes ({config.K},) and {expected}, got "
            f"{c_sd.shape}, {c_sr.shape} and {c_rd.shape}"
        )
    if np.any(c_sd < 0) or np.any(c_sr < 0) or np.any(c_rd < 0):
        raise ValueError("link power gains must be non-negative")
    source_scale = config.source_power / config.noise_variance
    relay_scale = np.asarray(config.relay_powers)[:, None] / config.noise_variance
    return ChannelGains(source_scale * c_sd, source_scale * c_sr, relay_scale * c_rd)


def direct_dominant(gains: ChannelGains) -> np.ndarray:
    """Mask of subcarriers where no relay hears the source better than the destination."""
    return gains.g_sr.max(axis=0) <= gains.g_sd


def mrc_snr(p_s_k: float, p_r_k, g_sd_k: float, g_rd_k, relays) -> float:
    """Combined SNR of one subcarrier: p_s G_sd + (Σ sqrt(p_r G_rd))²."""
    relays = np.asarray(relays, dtype=np.int64)
    amplitude = np.sqrt(np.asarray(p_r_k)[relays] * np.asarray(g_rd_k)[relays]).sum()
    return float(p_s_k * g_sd_k + amplitude**2)


def snr_mrc(
    alloc: Allocation, gains: ChannelGains, order: RelayOrder, k: int, b: int
) -> float:
    """SNR at the destination of subcarrier k after combining, with cut b."""
    _check_dimensions(alloc, gains, order)
    _check_index(k, b, gains.K, gains.N)
    return mrc_snr(
        alloc.p_s[k],
        alloc.p_r[:, k],
        gains.g_sd[k],
        gains.g_rd[:, k],
        order.assisting(k, b),
    )


def rate_relay(
    alloc: Allocation, gains: ChannelGains, order: RelayOrder, k: int, b: int
) -> float:
    """Relay mode rate of subcarrier k, limited by the bottleneck relay decoding."""
    gamma = snr_mrc(alloc, gains, order, k, b)
    decoding = alloc.p_s[k] * gains.g_sr[order.bottleneck(k, b), k]
    return float(np.log2(1.0 + min(gamma, decoding)))


def rate_direct(p_s_k, g_sd_k):
    """Direct mode rate 2 log2(1 + p G / 2), two repetitions over two slots.

    Works on scalars and on arrays of matching shape.
    """
    p_s_k = np.asarray(p_s_k, dtype=float)
    g_sd_k = np.asarray(g_sd_k, dtype=float)
    if np.any(p_s_k < 0) or np.any(g_sd_k < 0):
        raise ValueError("power fraction and gain must be non-negative")
    result = 2.0 * np.log2(1.0 + p_s_k * g_sd_k / 2.0)
    return float(result) if result.ndim == 0 else result


def relay_rates(
    p_s: np.ndarray,
    p_r: np.ndarray,
    cut: np.ndarray,
    gains: ChannelGains,
    order: RelayOrder,
) -> np.ndarray:
    """Relay mode rate of every subcarrier for the given cuts."""
    columns = np.arange(gains.K)
    members = order.rank >= cut[None, :]
    amplitude = np.where(members, np.sqrt(p_r * gains.g_rd), 0.0).sum(axis=0)
    gamma = p_s * gains.g_sd + amplitude**2
    decoding = p_s * gains.g_sr[order.order[columns, cut], columns]
    return np.log2(1.0 + np.minimum(gamma, decoding))


def sum_rate(alloc: Allocation, gains: ChannelGains, order: RelayOrder) -> RateReport:
    """Per-subcarrier and total rate of an allocation."""
    _check_dimensions(alloc, gains, order)
    direct = rate_direct(alloc.p_s, gains.g_sd)
    relay = relay_rates(alloc.p_s, alloc.p_r, alloc.cut, gains, order)
    per_subcarrier = np.where(alloc.mode == 1, relay, direct)
    return RateReport(per_subcarrier, float(per_subcarrier.sum()))


def check_feasible(
    alloc: Allocation, tol: float = FEASIBILITY_TOL
) -> tuple[bool, np.ndarray]:
    """Check the power budgets.

    Returns:
        The feasibility flag and the slack 1 - g, source first then one entry
        per relay. Negative slack means the budget is exceeded.
    """
    slack = 1.0 - np.concatenate(([alloc.p_s.sum()], alloc.p_r.sum(axis=1)))
    nonnegative = bool(np.all(alloc.p_s >= 0) and np.all(alloc.p_r >= 0))
    return nonnegative and bool(np.all(slack >= -tol)), slack
