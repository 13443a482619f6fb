"""Utility functions used in the dfrelay_cli package."""

__all__ = [
    "EXIT_OK",
    "EXIT_FAILURE",
    "EXIT_USAGE",
    "EXIT_CONFIG",
    "EXIT_DIMENSION",
    "EXIT_SOLVER",
    "bold_text",
    "print_error",
    "random_gains",
    "write_csv",
]

import os
import sys

import numpy as np
import pandas as pd

from dfrelay.model import ChannelGains

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2
EXIT_CONFIG = 3
EXIT_DIMENSION = 4
EXIT_SOLVER = 5


def bold_text(text: str) -> str:
    """Return bold text to print in console application."""
    return "\033[1m" + text + "\033[0m"


def print_error(message: str):
    sys.stderr.write(f'{bold_text("Error:")} {message}\n')


def random_gains(K: int, N: int, seed: int, mean_gain: float = 10.0) -> ChannelGains:
    """Exponentially distributed gains, the power gains of unit Rayleigh links."""
    rng = np.random.default_rng(seed)
    return ChannelGains(
        rng.exponential(mean_gain, K),
        rng.exponential(mean_gain, (N, K)),
        rng.exponential(mean_gain, (N, K)),
    )


def write_csv(frame: pd.DataFrame, path: str):
    """Write a table, creating the parent folder; floats keep 12 significant digits."""
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    frame.to_csv(path, index=False, float_format="%.12g")
