"""Reference allocations: a fixed heuristic and exact or conic oracles."""

__all__ = [
    "OracleResult",
    "heuristic_ra",
    "oracle_small",
    "oracle_convex_fixed",
    "oracle_lagrangian_fixed",
]

import functools
import sys
from dataclasses import dataclass

import cvxpy as cvx
import numpy as np

from dfrelay.errors import DimensionError, InstanceTooLargeError, SolverError
from dfrelay.model import (
    Allocation,
    ChannelGains,
    RelayOrder,
    direct_dominant,
    rate_direct,
    relay_rates,
    sum_rate,
)
from dfrelay.persubcarrier import MU_FLOOR, DualVector, SolutionCase, fixed_response

ORACLE_MAX_K = 4
ORACLE_MAX_N = 2
# upper bound on free relay power in the Lagrangian oracle
_RELAY_POWER_CAP = 1e6
_CLARABEL_SETTINGS = {"tol_gap_abs": 1e-10, "tol_gap_rel": 1e-10, "tol_feas": 1e-10}
# relay budget multipliers at or below this are read as a slack budget
_FREE_RELAY_PRICE = 1e-7


@dataclass(frozen=True, eq=False)
class OracleResult:
    allocation: Allocation
    sum_rate: float
    converged: bool = True


def heuristic_ra(gains: ChannelGains, order: RelayOrder) -> Allocation:
    """Equal power split with one relay per subcarrier.

    The source spreads its budget evenly. Outside the direct-dominant set each
    subcarrier is handed to the relay with the strongest source-relay gain
    (lowest index on ties) and every relay spreads its budget over the
    subcarriers it was handed. Each subcarrier then keeps relay mode only if
    it beats direct mode strictly; relay power on subcarriers left in direct
    mode is dropped.
    """
    K, N = gains.K, gains.N
    dominated = direct_dominant(gains)
    p_s = np.full(K, 1.0 / K)
    best_relay = np.argmax(gains.g_sr, axis=0)
    p_r = np.zeros((N, K))
    for r in range(N):
        omega = ~dominated & (best_relay == r)
        if omega.any():
            p_r[r, omega] = 1.0 / omega.sum()

    cut = order.rank[best_relay, np.arange(K)]
    relay = relay_rates(p_s, p_r, cut, gains, order)
    direct = rate_direct(p_s, gains.g_sd)
    mode = ~dominated & (relay > direct)
    p_r[:, ~mode] = 0.0
    return Allocation(mode, np.where(mode, cut, N - 1), p_s, p_r)


def _subcarrier_table(
    gains: ChannelGains, order: RelayOrder, k: int, grid: list[np.ndarray]
) -> tuple[np.ndarray, np.ndarray]:
    """Best rate and choice (-1 direct, else cut) on the power grid of subcarrier k."""
    p_s, p_r = grid[0], grid[1:]
    best = rate_direct(p_s, np.full(p_s.shape, gains.g_sd[k]))
    choice = np.full(p_s.shape, -1, dtype=np.int64)
    for b in range(gains.N):
        relays = order.assisting(k, b)
        amplitude = sum(np.sqrt(p_r[r] * gains.g_rd[r, k]) for r in relays)
        gamma = p_s * gains.g_sd[k] + amplitude**2
        decoding = p_s * gains.g_sr[order.bottleneck(k, b), k]
        rate = np.log2(1.0 + np.minimum(gamma, decoding))
        better = rate > best
        best = np.where(better, rate, best)
        choice = np.where(better, b, choice)
    return best, choice


def _max_plus(left: np.ndarray, right: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """out[u] = max over v <= u of left[u - v] + right[v], with the maximizing v."""
    shape = left.shape
    out = np.full(shape, -np.inf)
    argument = np.zeros(shape, dtype=np.int64)
    for flat, index in enumerate(np.ndindex(shape)):
        target = tuple(slice(i, None) for i in index)
        source = tuple(slice(0, n - i) for i, n in zip(index, shape))
        candidate = left[source] + right[index]
        region = out[target]
        better = candidate > region
        region[better] = candidate[better]
        argument[target][better] = flat
    return out, argument


def oracle_small(
    gains: ChannelGains, order: RelayOrder, grid_step: float = 0.05
) -> OracleResult:
    """Exhaustive optimum over modes, cuts and a power grid.

    Every node's budget is split in multiples of grid_step. Dynamic
    programming over subcarriers keeps, for each amount of budget used, the
    best total rate; the per-subcarrier tables already hold the best mode and
    cut for each power point.

    Raises:
        InstanceTooLargeError: K > 4 or N > 2.
        ValueError: grid_step outside [0.01, 0.25] or not dividing 1.
    """
    if gains.K > ORACLE_MAX_K or gains.N > ORACLE_MAX_N:
        raise InstanceTooLargeError(
            f"oracle_small handles K <= {ORACLE_MAX_K} and N <= {ORACLE_MAX_N}, "
            f"got K={gains.K} and N={gains.N}"
        )
    if not 0.01 <= grid_step <= 0.25:
        raise ValueError(f"grid_step must lie in [0.01, 0.25], got {grid_step}")
    units = int(round(1.0 / grid_step))
    if abs(units * grid_step - 1.0) > 1e-9:
        raise ValueError(f"grid_step {grid_step} does not divide 1")

    fractions = np.arange(units + 1) / units
    grid = np.meshgrid(*([fractions] * (1 + gains.N)), indexing="ij")
    tables = [_subcarrier_table(gains, order, k, grid) for k in range(gains.K)]

    total = tables[0][0]
    arguments = []
    for value, _ in tables[1:]:
        total, argument = _max_plus(total, value)
        arguments.append(argument)

    shape = total.shape
    remaining = np.array(np.unravel_index(np.argmax(total), shape))
    spent = [None] * gains.K
    for k in range(gains.K - 1, 0, -1):
        used = np.array(np.unravel_index(arguments[k - 1][tuple(remaining)], shape))
        spent[k] = used
        remaining = remaining - used
    spent[0] = remaining

    mode = np.zeros(gains.K, dtype=np.int8)
    cut = np.full(gains.K, gains.N - 1)
    p_s = np.zeros(gains.K)
    p_r = np.zeros((gains.N, gains.K))
    for k, used in enumerate(spent):
        p_s[k] = used[0] / units
        choice = int(tables[k][1][tuple(used)])
        if choice < 0:
            continue
        mode[k], cut[k] = 1, choice
        relays = order.assisting(k, choice)
        p_r[relays, k] = used[1:][relays] / units
    alloc = Allocation(mode, cut, p_s, p_r)
    return OracleResult(alloc, sum_rate(alloc, gains, order).sum_rate)


def oracle_convex_fixed(
    gains: ChannelGains,
    order: RelayOrder,
    mode,
    cut,
    tolerance: float = 1e-6,
) -> OracleResult:
    """Optimal powers for fixed modes and cuts, from a conic solver.

    The min of the two SNR terms is handled with an epigraph variable and
    the combined relay SNR (Σ sqrt(G p))² as the concave p-norm with p = 1/2.
    Modes follow the same pruning as the dual solver: relay-flagged
    subcarriers dominated by the direct link run in direct mode.

    Returns:
        The allocation, its sum rate, and whether the solver reported an
        optimum whose budget violation and stationarity residual are both
        within tolerance. The residual compares the powers to the closed-form
        Lagrangian maximizer at the multipliers the solver returns.
    """
    mode = np.asarray(mode)
    cut = np.asarray(cut, dtype=np.int64)
    if mode.shape != (gains.K,) or cut.shape != (gains.K,):
        raise DimensionError(f"mode and cut must have length {gains.K}")
    relay_mask = (mode == 1) & ~direct_dominant(gains)

    p_s = cvx.Variable(gains.K, nonneg=True)
    p_r = cvx.Variable((gains.N, gains.K), nonneg=True)
    constraints = [cvx.sum(p_s) <= 1, cvx.sum(p_r, axis=1) <= 1]
    rates = []
    for k in range(gains.K):
        if not relay_mask[k]:
            rates.append(2 * cvx.log1p(gains.g_sd[k] * p_s[k] / 2) / np.log(2))
            constraints.append(p_r[:, k] == 0)
            continue
        relays = order.assisting(k, cut[k])
        idle = order.order[k, : cut[k]]
        gamma = cvx.Variable(nonneg=True)
        constraints += [
            gamma <= gains.g_sr[order.bottleneck(k, cut[k]), k] * p_s[k],
            gamma
            <= gains.g_sd[k] * p_s[k]
            + cvx.pnorm(cvx.multiply(gains.g_rd[relays, k], p_r[relays, k]), 0.5),
        ]
        if idle.size:
            constraints.append(p_r[idle, k] == 0)
        rates.append(cvx.log1p(gamma) / np.log(2))
    problem = cvx.Problem(cvx.Maximize(cvx.sum(cvx.hstack(rates))), constraints)
    problem.solve(solver=cvx.CLARABEL, **_CLARABEL_SETTINGS)
    if p_s.value is None:
        message = f"conic oracle returned no solution (status {problem.status})"
        sys.stderr.write(message + "\n")
        raise SolverError(message)

    source = np.maximum(p_s.value, 0.0)
    relay = np.maximum(p_r.value, 0.0)
    relay[:, ~relay_mask] = 0.0
    violation = max(source.sum(), relay.sum(axis=1).max()) - 1.0
    multipliers = _conic_multipliers(constraints[0].dual_value, constraints[1].dual_value)
    residual = _stationarity_residual(
        multipliers, gains, order, relay_mask, cut, source, relay
    )
    source /= max(1.0, source.sum())
    relay /= np.maximum(1.0, relay.sum(axis=1, keepdims=True))
    alloc = Allocation(relay_mask, cut, source, relay)
    converged = (
        problem.status in (cvx.OPTIMAL, cvx.OPTIMAL_INACCURATE)
        and violation <= tolerance
        and residual <= tolerance
    )
    return OracleResult(alloc, sum_rate(alloc, gains, order).sum_rate, converged)


def _conic_multipliers(dual_s, dual_r) -> DualVector:
    mu_s = max(float(np.squeeze(dual_s)), MU_FLOOR)
    mu_r = np.atleast_1d(np.asarray(dual_r, dtype=float))
    return DualVector(mu_s, np.where(mu_r > _FREE_RELAY_PRICE, mu_r, 0.0))


def _stationarity_residual(
    mu: DualVector, gains, order, relay_mask, cut, source, relay
) -> float:
    """Distance of the conic powers to the Lagrangian maximizer at the conic multipliers.

    Source powers are compared everywhere, relay powers only where every
    assisting relay is priced and the maximizer is unique.
    """
    block = fixed_response(mu, gains, order, relay_mask, cut)
    residual = float(np.max(np.abs(block.p_s - source)))
    unique = block.case == SolutionCase.RELAY_CASE2.value
    if unique.any():
        residual = max(
            residual, float(np.max(np.abs(block.p_r[:, unique] - relay[:, unique])))
        )
    return residual


@functools.lru_cache(maxsize=None)
def _lagrangian_program(size: int):
    """Parameterized per-subcarrier relay mode Lagrangian with `size` assisting relays."""
    p_s = cvx.Variable(nonneg=True)
    p_r = cvx.Variable(size, nonneg=True)
    gamma = cvx.Variable(nonneg=True)
    mu_s = cvx.Parameter(nonneg=True)
    mu_r = cvx.Parameter(size, nonneg=True)
    g_sd = cvx.Parameter(nonneg=True)
    g_srb = cvx.Parameter(nonneg=True)
    g_rd = cvx.Parameter(size, nonneg=True)
    objective = cvx.Maximize(cvx.log1p(gamma) / np.log(2) - mu_s * p_s - mu_r @ p_r)
    constraints = [
        gamma <= g_srb * p_s,
        gamma <= g_sd * p_s + cvx.pnorm(cvx.multiply(g_rd, p_r), 0.5),
        p_r <= _RELAY_POWER_CAP,
    ]
    parameters = {"mu_s": mu_s, "mu_r": mu_r, "g_sd": g_sd, "g_srb": g_srb, "g_rd": g_rd}
    return cvx.Problem(objective, constraints), parameters, p_s, p_r


def oracle_lagrangian_fixed(
    mu: DualVector, gains: ChannelGains, order: RelayOrder, k: int, b: int
) -> tuple[float, np.ndarray, float]:
    """Relay mode Lagrangian of subcarrier k with cut b, maximized by a conic solver.

    Returns:
        p_s, the relay powers (zero outside the assisting set) and the
        Lagrangian value.
    """
    if not 0 <= k < gains.K or not 0 <= b < gains.N:
        raise IndexError(f"subcarrier {k} / cut {b} out of range")
    relays = order.assisting(k, b)
    problem, parameters, p_s, p_r = _lagrangian_program(relays.size)
    parameters["mu_s"].value = mu.mu_s
    parameters["mu_r"].value = mu.mu_r[relays]
    parameters["g_sd"].value = gains.g_sd[k]
    parameters["g_srb"].value = gains.g_sr[order.bottleneck(k, b), k]
    parameters["g_rd"].value = gains.g_rd[relays, k]
    value = problem.solve(solver=cvx.CLARABEL, **_CLARABEL_SETTINGS)
    if p_s.value is None:
        raise SolverError(f"conic oracle returned no solution (status {problem.status})")
    powers = np.zeros(gains.N)
    powers[relays] = np.maximum(p_r.value, 0.0)
    return float(max(p_s.value, 0.0)), powers, float(value)
