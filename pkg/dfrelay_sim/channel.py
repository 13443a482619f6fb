"""Frequency selective channel draws for a planar source/relays/destination layout."""

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
]

import dataclasses
from dataclasses import dataclass

import numpy as np

from dfrelay.model import ChannelGains, SystemConfig, normalize_gains

Point = tuple[float, float]

DEFAULT_RELAY_POSITIONS: tuple[Point, ...] = (
    (-6.0, -7.0),
    (-4.0, -7.0),
    (-2.0, -7.0),
    (2.0, -7.0),
    (4.0, -7.0),
    (6.0, -7.0),
)


def _point(value) -> Point:
    x, y = value
    return float(x), float(y)


@dataclass(frozen=True)
class Scenario:
    """Node positions and channel statistics.

    Attributes:
        source_pos: source coordinates.
        dest_pos: destination coordinates.
        relay_pos: one coordinate pair per relay.
        pathloss_exponent: large scale gain is d ** -pathloss_exponent.
        shadowing_sigma_db: standard deviation of the log-normal shadowing,
            0 disables shadowing.
        tap_count: number of Rayleigh taps of the impulse response.
        tap_decay: tap l has variance proportional to exp(-tap_decay * l).
        K: number of subcarriers.
        seed: base seed of every random draw.
    """

    source_pos: Point = (0.0, 0.0)
    dest_pos: Point = (0.0, -15.0)
    relay_pos: tuple[Point, ...] = DEFAULT_RELAY_POSITIONS
    pathloss_exponent: float = 3.0
    shadowing_sigma_db: float = 1.0
    tap_count: int = 6
    tap_decay: float = 3.0
    K: int = 256
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "source_pos", _point(self.source_pos))
        object.__setattr__(self, "dest_pos", _point(self.dest_pos))
        object.__setattr__(
            self, "relay_pos", tuple(_point(pos) for pos in self.relay_pos)
        )
        if not self.relay_pos:
            raise ValueError("a scenario needs at least one relay")
        if self.K < 1 or self.tap_count < 1:
            raise ValueError("K and tap_count must be positive")
        if self.tap_count > self.K:
            raise ValueError(
                f"tap_count {self.tap_count} exceeds the number of subcarriers {self.K}"
            )
        if self.shadowing_sigma_db < 0 or self.pathloss_exponent < 0:
            raise ValueError("shadowing sigma and path loss exponent must be >= 0")

    @property
    def N(self) -> int:
        return len(self.relay_pos)

    def with_seed(self, seed: int) -> "Scenario":
        return dataclasses.replace(self, seed=seed)

    def tap_profile(self) -> np.ndarray:
        """Tap variances, normalized to a unit sum."""
        profile = np.exp(-self.tap_decay * np.arange(self.tap_count))
        return profile / profile.sum()


@dataclass(frozen=True, eq=False)
class LinkPowers:
    """|C|² of every link, before normalization."""

    c_sd: np.ndarray
    c_sr: np.ndarray
    c_rd: np.ndarray


def lognormal_mean(sigma_db: float) -> float:
    """E[xi] for 10 log10 xi ~ N(0, sigma_db²)."""
    return float(np.exp((sigma_db * np.log(10.0) / 10.0) ** 2 / 2.0))


def distance(a: Point, b: Point) -> float:
    return float(np.hypot(a[0] - b[0], a[1] - b[1]))


def realization_rng(seed: int, realization: int) -> np.random.Generator:
    """Independent stream per realization, the same whatever the worker layout."""
    return np.random.default_rng(np.random.SeedSequence([seed, realization]))


def gen_channel(
    scenario: Scenario,
    tx: Point,
    rx: Point,
    rng: np.random.Generator | None = None,
) -> np.ndarray:
    """Frequency response of one link on the K subcarriers.

    The impulse response has tap_count independent circularly symmetric
    Gaussian taps scaled by the path loss and one shadowing draw; the
    response is its K-point DFT.

    Raises:
        ValueError: the two endpoints coincide.
    """
    d = distance(tx, rx)
    if d <= 0:
        raise ValueError(f"link endpoints {tx} and {rx} coincide")
    if rng is None:
        rng = np.random.default_rng(scenario.seed)
    shadowing = 1.0
    if scenario.shadowing_sigma_db > 0:
        shadowing = 10.0 ** (rng.normal(0.0, scenario.shadowing_sigma_db) / 10.0)
    variance = shadowing * d ** (-scenario.pathloss_exponent) * scenario.tap_profile()
    taps = np.sqrt(variance / 2.0) * (
        rng.standard_normal(scenario.tap_count)
        + 1j * rng.standard_normal(scenario.tap_count)
    )
    exponent = np.outer(np.arange(scenario.K), np.arange(scenario.tap_count))
    return np.exp(-2j * np.pi * exponent / scenario.K) @ taps


def draw_link_powers(scenario: Scenario, realization: int) -> LinkPowers:
    """All link power gains of one realization.

    Draw order: source-destination, then for each relay its source-relay
    and relay-destination links.
    """
    rng = realization_rng(scenario.seed, realization)
    c_sd = np.abs(gen_channel(scenario, scenario.source_pos, scenario.dest_pos, rng)) ** 2
    c_sr = np.empty((scenario.N, scenario.K))
    c_rd = np.empty((scenario.N, scenario.K))
    for i, relay in enumerate(scenario.relay_pos):
        c_sr[i] = np.abs(gen_channel(scenario, scenario.source_pos, relay, rng)) ** 2
        c_rd[i] = np.abs(gen_channel(scenario, relay, scenario.dest_pos, rng)) ** 2
    return LinkPowers(c_sd, c_sr, c_rd)


def realization_gains(
    scenario: Scenario, config: SystemConfig, realization: int
) -> ChannelGains:
    links = draw_link_powers(scenario, realization)
    return normalize_gains(links.c_sd, links.c_sr, links.c_rd, config)
