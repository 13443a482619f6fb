import unittest
import warnings

import numpy as np
from hypothesis import given, settings, strategies as st
from scipy.optimize import minimize_scalar

from dfrelay.baseline import oracle_lagrangian_fixed
from dfrelay.errors import UnboundedDualError
from dfrelay.model import LOG2E, ChannelGains, RelayOrder
from dfrelay.persubcarrier import (
    DualVector,
    SolutionCase,
    best_response,
    fixed_response,
    gbar,
    solve_direct,
    solve_relay_fixed_b,
    solve_subcarrier,
)


def single(g_sd, g_sr, g_rd) -> tuple[ChannelGains, RelayOrder]:
    gains = ChannelGains(
        [g_sd], [[g] for g in np.atleast_1d(g_sr)], [[g] for g in np.atleast_1d(g_rd)]
    )
    return gains, RelayOrder.from_gains(gains)


def relay_lagrangian(mu, gains, order, b, p_s, p_r) -> float:
    relays = order.assisting(0, b)
    gamma = p_s * gains.g_sd[0] + np.sqrt(p_r[relays] * gains.g_rd[relays, 0]).sum() ** 2
    decoding = p_s * gains.g_sr[order.bottleneck(0, b), 0]
    return np.log2(1 + min(gamma, decoding)) - mu.mu_s * p_s - mu.mu_r @ p_r


gain = st.floats(min_value=0.1, max_value=50.0)
multiplier = st.one_of(st.just(0.0), st.floats(min_value=0.05, max_value=5.0))


@st.composite
def instances(draw):
    N = draw(st.integers(min_value=1, max_value=3))
    gains, order = single(
        draw(gain),
        [draw(gain) for _ in range(N)],
        [draw(gain) for _ in range(N)],
    )
    mu = DualVector(
        draw(st.floats(min_value=0.05, max_value=5.0)),
        [draw(multiplier) for _ in range(N)],
    )
    return mu, gains, order


class TestSolveDirect(unittest.TestCase):
    def test_inactive_below_water_level(self):
        self.assertEqual(solve_direct(1.0, 0.5), (0.0, 0.0))

    def test_water_filling(self):
        p_s, value = solve_direct(1.0, 10.0)
        expected = 2 * (LOG2E - 0.1)
        self.assertAlmostEqual(p_s, expected, places=12)
        self.assertAlmostEqual(
            value, 2 * np.log2(1 + expected * 5.0) - expected, places=12
        )

    def test_matches_numerical_maximum(self):
        for mu_s, g in [(0.3, 2.0), (1.0, 10.0), (4.0, 40.0)]:
            p_s, value = solve_direct(mu_s, g)
            result = minimize_scalar(
                lambda p: -(2 * np.log2(1 + p * g / 2) - mu_s * p),
                bounds=(0.0, 20.0),
                method="bounded",
                options={"xatol": 1e-10},
            )
            self.assertAlmostEqual(value, -result.fun, places=6)
            self.assertAlmostEqual(p_s, result.x, places=4)

    def test_zero_multiplier_is_unbounded(self):
        with self.assertRaises(UnboundedDualError):
            solve_direct(0.0, 1.0)


class TestGbar(unittest.TestCase):
    def test_weighted_sum(self):
        gains, order = single(1.0, [2.0, 3.0], [4.0, 6.0])
        mu = DualVector(1.0, [2.0, 3.0])
        self.assertAlmostEqual(gbar(mu, gains, order, 0, 0), 4.0, places=12)
        self.assertAlmostEqual(gbar(mu, gains, order, 0, 1), 2.0, places=12)

    def test_zero_multiplier_flag(self):
        gains, order = single(1.0, [2.0, 3.0], [4.0, 6.0])
        self.assertIsNone(gbar(DualVector(1.0, [1.0, 0.0]), gains, order, 0, 0))


class TestRelayFixedCut(unittest.TestCase):
    def test_case1_relays_too_expensive(self):
        gains, order = single(1.0, 5.0, 1.0)
        solution = solve_relay_fixed_b(DualVector(1.0, [2.0]), gains, order, 0, 0)
        self.assertEqual(solution.case, SolutionCase.RELAY_CASE1)
        self.assertAlmostEqual(solution.p_s, LOG2E - 1.0, places=12)
        self.assertEqual(solution.x_opt, 0.0)
        np.testing.assert_array_equal(solution.p_r, [0.0])

    def test_case2_all_relays_priced(self):
        gains, order = single(1.0, 5.0, 4.0)
        solution = solve_relay_fixed_b(DualVector(1.0, [1.0]), gains, order, 0, 0)
        p_s = LOG2E / 2.0 - 0.2
        self.assertEqual(solution.case, SolutionCase.RELAY_CASE2)
        self.assertAlmostEqual(solution.p_s, p_s, places=12)
        self.assertAlmostEqual(solution.x_opt, 4.0 * p_s, places=12)
        self.assertAlmostEqual(solution.p_r[0], p_s, places=12)

    def test_case3_free_relay(self):
        gains, order = single(1.0, 5.0, 4.0)
        solution = solve_relay_fixed_b(DualVector(1.0, [0.0]), gains, order, 0, 0)
        p_s = LOG2E - 0.2
        self.assertEqual(solution.case, SolutionCase.RELAY_CASE3)
        self.assertAlmostEqual(solution.p_s, p_s, places=12)
        self.assertAlmostEqual(solution.p_r[0], 4.0 * 4.0 * p_s / 16.0, places=12)

    def test_free_relay_takes_all_power_among_assisting(self):
        gains, order = single(1.0, [5.0, 6.0], [4.0, 2.0])
        solution = solve_relay_fixed_b(DualVector(1.0, [1.0, 0.0]), gains, order, 0, 0)
        self.assertEqual(solution.case, SolutionCase.RELAY_CASE3)
        self.assertEqual(solution.p_r[0], 0.0)
        self.assertGreater(solution.p_r[1], 0.0)

    def test_relays_below_cut_stay_silent(self):
        gains, order = single(1.0, [5.0, 8.0], [4.0, 4.0])
        solution = solve_relay_fixed_b(DualVector(1.0, [1.0, 1.0]), gains, order, 0, 1)
        self.assertEqual(solution.p_r[0], 0.0)

    def test_agrees_with_conic_oracle(self):
        cases = [
            (1.0, [5.0], [1.0], [2.0]),
            (1.0, [5.0], [4.0], [1.0]),
            (1.0, [5.0], [4.0], [0.0]),
            (2.0, [9.0, 12.0], [3.0, 5.0], [0.5, 1.5]),
            (0.5, [3.0, 20.0], [10.0, 1.0], [0.2, 0.0]),
        ]
        for g_sd, g_sr, g_rd, mu_r in cases:
            gains, order = single(g_sd, g_sr, g_rd)
            mu = DualVector(0.8, mu_r)
            for b in range(gains.N):
                if gains.g_sr[order.bottleneck(0, b), 0] <= g_sd:
                    continue
                closed = solve_relay_fixed_b(mu, gains, order, 0, b)
                _, _, value = oracle_lagrangian_fixed(mu, gains, order, 0, b)
                self.assertLessEqual(
                    abs(closed.lagrangian_value - value),
                    1e-5 * max(1.0, abs(value)),
                    msg=f"gains {g_sd}, {g_sr}, {g_rd}, mu_r {mu_r}, cut {b}",
                )

    def test_agrees_with_conic_oracle_on_random_draws(self):
        rng = np.random.default_rng(2024)
        seen = {case: 0 for case in SolutionCase if case is not SolutionCase.DIRECT}
        for draw in range(200):
            N = int(rng.integers(1, 4))
            g_sd = rng.uniform(0.5, 5.0)
            g_rd = rng.uniform(0.5, 20.0, N)
            gains, order = single(g_sd, rng.uniform(g_sd + 1.0, 30.0, N), g_rd)
            mu_s = rng.uniform(0.1, 2.0)
            target = draw % 3
            if target == 0:
                # every assisting relay too expensive to pay off
                mu_r = g_rd * N * mu_s / g_sd * rng.uniform(1.1, 3.0, N)
            elif target == 1:
                mu_r = g_rd * mu_s / g_sd * rng.uniform(0.05, 0.9, N)
            else:
                mu_r = rng.uniform(0.1, 3.0, N)
                mu_r[order.order[0, -1]] = 0.0
            mu = DualVector(mu_s, mu_r)
            b = int(rng.integers(0, N))
            closed = solve_relay_fixed_b(mu, gains, order, 0, b)
            seen[closed.case] += 1
            _, _, value = oracle_lagrangian_fixed(mu, gains, order, 0, b)
            self.assertLessEqual(
                abs(closed.lagrangian_value - value),
                1e-5 * max(1.0, abs(value)),
                msg=f"draw {draw}: {closed.case.name}",
            )
        for case, count in seen.items():
            self.assertGreaterEqual(count, 20, msg=case.name)

    def test_skipped_columns_raise_no_warnings(self):
        gains = ChannelGains([3.0, 1.0], [[2.0, 5.0]], [[0.0, 1.0]])
        order = RelayOrder.from_gains(gains)
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            block = fixed_response(DualVector(1.0, [0.5]), gains, order, [1, 1], [0, 0])
        self.assertTrue(np.all(np.isfinite(block.p_s)))
        self.assertEqual(SolutionCase(int(block.case[1])), SolutionCase.RELAY_CASE2)

    @settings(max_examples=200, deadline=None)
    @given(instances(), st.data())
    def test_kkt_identity_and_bottleneck(self, instance, data):
        mu, gains, order = instance
        b = data.draw(st.integers(min_value=0, max_value=gains.N - 1))
        g_srb = gains.g_sr[order.bottleneck(0, b), 0]
        solution = solve_relay_fixed_b(mu, gains, order, 0, b)
        if g_srb > gains.g_sd[0]:
            identity = g_srb * solution.alpha + gains.g_sd[0] * solution.beta
            self.assertLessEqual(abs(identity - mu.mu_s), 1e-9 * mu.mu_s)
        relays = order.assisting(0, b)
        gamma = (
            solution.p_s * gains.g_sd[0]
            + np.sqrt(solution.p_r[relays] * gains.g_rd[relays, 0]).sum() ** 2
        )
        if g_srb > gains.g_sd[0]:
            bound = solution.p_s * g_srb
            self.assertLessEqual(gamma, bound + 1e-9 * (1 + bound))
        idle = order.order[0, :b]
        np.testing.assert_array_equal(solution.p_r[idle], 0.0)

    @settings(max_examples=200, deadline=None)
    @given(instances(), st.data())
    def test_no_perturbation_improves(self, instance, data):
        mu, gains, order = instance
        b = data.draw(st.integers(min_value=0, max_value=gains.N - 1))
        solution = solve_relay_fixed_b(mu, gains, order, 0, b)
        best = relay_lagrangian(mu, gains, order, b, solution.p_s, solution.p_r)
        self.assertAlmostEqual(best, solution.lagrangian_value, places=9)
        scale = data.draw(st.floats(min_value=0.0, max_value=3.0))
        p_s = data.draw(st.floats(min_value=0.0, max_value=3.0))
        p_r = np.array(
            [data.draw(st.floats(min_value=0.0, max_value=3.0)) for _ in range(gains.N)]
        )
        for candidate_s, candidate_r in [
            (p_s, p_r),
            (solution.p_s * scale, solution.p_r),
            (solution.p_s, solution.p_r * scale),
        ]:
            value = relay_lagrangian(mu, gains, order, b, candidate_s, candidate_r)
            self.assertLessEqual(value, best + 1e-9 * (1 + abs(best)))


class TestSolveSubcarrier(unittest.TestCase):
    def test_direct_dominant_subcarrier_stays_direct(self):
        gains, order = single(10.0, [3.0, 9.0], [50.0, 50.0])
        solution = solve_subcarrier(DualVector(1.0, [0.0, 0.0]), gains, order, 0)
        self.assertEqual(solution.t, 0)
        self.assertEqual(solution.case, SolutionCase.DIRECT)
        np.testing.assert_array_equal(solution.p_r, [0.0, 0.0])

    def test_cheap_strong_relays_win(self):
        gains, order = single(0.5, [50.0], [50.0])
        solution = solve_subcarrier(DualVector(0.5, [0.01]), gains, order, 0)
        self.assertEqual(solution.t, 1)
        _, value_direct = solve_direct(0.5, 0.5)
        self.assertGreater(solution.lagrangian_value, value_direct)

    @settings(max_examples=200, deadline=None)
    @given(instances())
    def test_best_of_all_candidates(self, instance):
        mu, gains, order = instance
        solution = solve_subcarrier(mu, gains, order, 0)
        candidates = [solve_direct(mu.mu_s, gains.g_sd[0])[1]]
        for b in range(gains.N):
            if gains.g_sr[order.bottleneck(0, b), 0] > gains.g_sd[0]:
                candidates.append(
                    solve_relay_fixed_b(mu, gains, order, 0, b).lagrangian_value
                )
        self.assertAlmostEqual(solution.lagrangian_value, max(candidates), places=12)

    def test_vectorized_matches_scalar(self):
        rng = np.random.default_rng(3)
        gains = ChannelGains(
            rng.exponential(5.0, 6), rng.exponential(5.0, (3, 6)), rng.exponential(5.0, (3, 6))
        )
        order = RelayOrder.from_gains(gains)
        mu = DualVector(0.7, [0.3, 0.0, 1.2])
        block = best_response(mu, gains, order)
        for k in range(gains.K):
            solution = solve_subcarrier(mu, gains, order, k)
            self.assertEqual(solution.t, block.t[k])
            self.assertAlmostEqual(solution.lagrangian_value, block.value[k], places=12)
