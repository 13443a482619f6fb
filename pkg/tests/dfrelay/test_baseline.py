import unittest
import warnings

import numpy as np
import pytest

from dfrelay.baseline import heuristic_ra, oracle_convex_fixed, oracle_small
from dfrelay.dual import SubgradientConfig, duality_gap_probe, solve_dual
from dfrelay.errors import InstanceTooLargeError
from dfrelay.model import ChannelGains, RelayOrder, check_feasible, rate_direct, sum_rate


def random_instance(K: int, N: int, seed: int):
    rng = np.random.default_rng(seed)
    gains = ChannelGains(
        rng.exponential(5.0, K), rng.exponential(5.0, (N, K)), rng.exponential(5.0, (N, K))
    )
    return gains, RelayOrder.from_gains(gains)


class TestHeuristic(unittest.TestCase):
    def test_all_direct(self):
        gains = ChannelGains([4.0, 6.0, 8.0], [[1.0, 1.0, 1.0]], [[9.0, 9.0, 9.0]])
        order = RelayOrder.from_gains(gains)
        alloc = heuristic_ra(gains, order)
        np.testing.assert_array_equal(alloc.mode, [0, 0, 0])
        np.testing.assert_allclose(alloc.p_s, [1 / 3] * 3)
        np.testing.assert_array_equal(alloc.p_r, 0.0)
        expected = sum(2 * np.log2(1 + g / 6) for g in (4.0, 6.0, 8.0))
        self.assertAlmostEqual(sum_rate(alloc, gains, order).sum_rate, expected, places=12)

    def test_best_relay_shares_its_budget(self):
        gains = ChannelGains(
            [0.1, 0.1, 0.1, 0.1],
            [[50.0, 50.0, 50.0, 1.0], [1.0, 1.0, 1.0, 50.0]],
            [[50.0, 50.0, 50.0, 50.0], [50.0, 50.0, 50.0, 50.0]],
        )
        order = RelayOrder.from_gains(gains)
        alloc = heuristic_ra(gains, order)
        np.testing.assert_array_equal(alloc.mode, [1, 1, 1, 1])
        np.testing.assert_allclose(alloc.p_r[0], [1 / 3, 1 / 3, 1 / 3, 0.0])
        np.testing.assert_allclose(alloc.p_r[1], [0.0, 0.0, 0.0, 1.0])
        np.testing.assert_array_equal(alloc.cut, [1, 1, 1, 1])
        self.assertTrue(check_feasible(alloc)[0])

    def test_ties_go_to_lowest_relay(self):
        gains = ChannelGains([0.1], [[30.0], [30.0]], [[40.0], [40.0]])
        alloc = heuristic_ra(gains, RelayOrder.from_gains(gains))
        np.testing.assert_allclose(alloc.p_r[:, 0], [1.0, 0.0])

    def test_fallback_to_direct_drops_relay_share(self):
        gains = ChannelGains([5.0, 0.1], [[6.0, 50.0]], [[50.0, 50.0]])
        order = RelayOrder.from_gains(gains)
        alloc = heuristic_ra(gains, order)
        np.testing.assert_array_equal(alloc.mode, [0, 1])
        np.testing.assert_allclose(alloc.p_r, [[0.0, 0.5]])
        self.assertAlmostEqual(alloc.p_s.sum(), 1.0, places=12)
        self.assertAlmostEqual(alloc.p_r.sum(), 0.5, places=12)

    def test_feasible_on_random_instances(self):
        for seed in range(5):
            gains, order = random_instance(16, 3, seed)
            alloc = heuristic_ra(gains, order)
            self.assertTrue(check_feasible(alloc)[0])
            np.testing.assert_array_equal(alloc.p_r[:, alloc.mode == 0], 0.0)
            self.assertAlmostEqual(alloc.p_s.sum(), 1.0, places=12)
            self.assertTrue(np.all(alloc.p_r.sum(axis=1) <= 1.0 + 1e-12))


class TestOracleSmall(unittest.TestCase):
    def test_guards(self):
        gains, order = random_instance(5, 1, 0)
        with self.assertRaises(InstanceTooLargeError):
            oracle_small(gains, order)
        gains, order = random_instance(2, 1, 0)
        with self.assertRaises(ValueError):
            oracle_small(gains, order, grid_step=0.3)
        with self.assertRaises(ValueError):
            oracle_small(gains, order, grid_step=0.03)

    def test_single_direct_subcarrier(self):
        gains = ChannelGains([4.0], [[1.0]], [[1.0]])
        result = oracle_small(gains, RelayOrder.from_gains(gains), grid_step=0.25)
        self.assertEqual(result.allocation.p_s[0], 1.0)
        self.assertAlmostEqual(result.sum_rate, rate_direct(1.0, 4.0), places=12)

    def test_bounds(self):
        for seed in range(3):
            gains, order = random_instance(2, 2, seed)
            fine = oracle_small(gains, order, grid_step=0.05)
            coarse = oracle_small(gains, order, grid_step=0.25)
            self.assertTrue(check_feasible(fine.allocation)[0])
            self.assertAlmostEqual(
                fine.sum_rate, sum_rate(fine.allocation, gains, order).sum_rate, places=9
            )
            self.assertGreaterEqual(fine.sum_rate, coarse.sum_rate - 1e-12)
            heuristic = sum_rate(heuristic_ra(gains, order), gains, order).sum_rate
            self.assertGreaterEqual(fine.sum_rate, heuristic - 1e-9)
            report = duality_gap_probe(gains, order, SubgradientConfig(max_iterations=2000))
            self.assertLessEqual(fine.sum_rate, report.dual_value + 1e-9)

    def test_three_subcarriers_two_relays(self):
        gains, order = random_instance(3, 2, 7)
        result = oracle_small(gains, order, grid_step=0.1)
        self.assertTrue(check_feasible(result.allocation)[0])
        idle = [
            result.allocation.p_r[order.order[k, : result.allocation.cut[k]], k]
            for k in range(3)
        ]
        for powers in idle:
            np.testing.assert_array_equal(powers, 0.0)


class TestOracleConvexFixed(unittest.TestCase):
    def test_direct_water_filling(self):
        gains = ChannelGains([2.0, 8.0], [[1.0, 1.0]], [[1.0, 1.0]])
        order = RelayOrder.from_gains(gains)
        result = oracle_convex_fixed(gains, order, [0, 0], [0, 0])
        # equal water level 1/G + p/2 on both subcarriers
        exact = [0.125, 0.875]
        if result.converged:
            np.testing.assert_allclose(result.allocation.p_s, exact, atol=1e-6)
        else:
            np.testing.assert_allclose(result.allocation.p_s, exact, atol=1e-3)
        loose = oracle_convex_fixed(gains, order, [0, 0], [0, 0], tolerance=1e-3)
        self.assertTrue(loose.converged)
        self.assertAlmostEqual(
            loose.sum_rate, rate_direct(0.125, 2.0) + rate_direct(0.875, 8.0), places=5
        )

    def test_not_below_heuristic(self):
        gains, order = random_instance(6, 2, 3)
        heuristic = heuristic_ra(gains, order)
        result = oracle_convex_fixed(gains, order, heuristic.mode, heuristic.cut)
        self.assertTrue(check_feasible(result.allocation)[0])
        self.assertGreaterEqual(
            result.sum_rate, sum_rate(heuristic, gains, order).sum_rate - 1e-6
        )

    def test_zero_gains(self):
        gains = ChannelGains([0.0, 0.0], [[0.0, 0.0]], [[0.0, 0.0]])
        result = oracle_convex_fixed(gains, RelayOrder.from_gains(gains), [0, 0], [0, 0])
        self.assertAlmostEqual(result.sum_rate, 0.0, places=9)
        np.testing.assert_array_equal(result.allocation.p_r, 0.0)


@pytest.mark.slow
class TestSmallInstanceOptimality(unittest.TestCase):
    def test_grid_optimum_against_dual_solver(self):
        for seed in range(20):
            gains, order = random_instance(4, 2, seed)
            oracle = oracle_small(gains, order, grid_step=0.02)
            report = duality_gap_probe(gains, order)
            self.assertLessEqual(oracle.sum_rate, report.dual_value + 0.05, msg=f"seed {seed}")
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", RuntimeWarning)
                alloc, trace = solve_dual(gains, order)
            self.assertTrue(check_feasible(alloc)[0])
            if trace.converged:
                primal = sum_rate(alloc, gains, order).sum_rate
                self.assertGreaterEqual(primal, oracle.sum_rate - 0.1, msg=f"seed {seed}")
