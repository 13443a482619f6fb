"""Energy and rate metrics of the Monte Carlo study."""

__all__ = ["RESULT_COLUMNS", "MetricsRow", "dbw_to_watt", "watt_to_dbw", "tetib"]

from dataclasses import dataclass

import numpy as np

from dfrelay.model import Allocation, RateReport, SystemConfig

RESULT_COLUMNS = [
    "solver",
    "ps_dbw",
    "realization",
    "sum_rate_bpts",
    "tetib_j_per_bit",
    "converged",
]


@dataclass(frozen=True)
class MetricsRow:
    solver_name: str
    source_power_dbw: float
    realization_id: int
    sum_rate: float
    tetib: float
    converged: bool

    def as_record(self) -> dict:
        return dict(
            zip(
                RESULT_COLUMNS,
                (
                    self.solver_name,
                    self.source_power_dbw,
                    self.realization_id,
                    self.sum_rate,
                    self.tetib,
                    self.converged,
                ),
            )
        )


def dbw_to_watt(value_dbw):
    return 10.0 ** (np.asarray(value_dbw, dtype=float) / 10.0)


def watt_to_dbw(value_watt):
    return 10.0 * np.log10(np.asarray(value_watt, dtype=float))


def tetib(alloc: Allocation, rates: RateReport, config: SystemConfig) -> float:
    """Total energy per information bit, in joules per bit.

    Energy spent by the source and the relays over one slot divided by the
    sum rate.

    Raises:
        ValueError: the sum rate is not positive.
    """
    if rates.sum_rate <= 0:
        raise ValueError("energy per bit is undefined for a zero sum rate")
    spent = config.source_power * alloc.p_s.sum() + np.dot(
        config.relay_powers, alloc.p_r.sum(axis=1)
    )
    return float(config.slot_duration * spent / rates.sum_rate)
