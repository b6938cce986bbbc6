import math

from unittest import TestCase

import attr
import numpy as np
from scipy.optimize import brentq

from keepalive.components.cost import offline_optimal_outcome, realized_cost
from keepalive.components.errors import (DomainError, InsufficientDataError,
    InvalidParamsError)
from keepalive.components.point_process import (HawkesParams, SimConfig,
    hazard, intensity)
from keepalive.components.policy import (CostParams,
    PolicyKind, PolicySpec, WindowKind, WindowSchedule, approx_ratio_bound,
    empty_history_window, history_weights, offline_optimal_cost,
    optimal_hawkes_window, optimized_ttl, optimized_ttl_from_lengths,
    tau_approx, tau_fixed, ttl_ratio_bound, window_bounds,
    windows_from_hazard, windows_from_weights)
from keepalive.util.test_utils import random_history


def _random_finite_case(rng, max_arrivals=200):
    params = HawkesParams(lambda0=rng.uniform(0.01, 1.0),
        alpha=rng.uniform(0.1, 2.0), beta=rng.uniform(0.5, 3.0))
    history = random_history(rng, int(rng.integers(1, max_arrivals + 1)))
    peak = intensity(params, history, history[-1])
    ratio = rng.uniform(params.lambda0, peak)
    return params, history, CostParams(c_p=1.0, c_cs=1.0 / ratio)

def _random_case(rng, max_arrivals=200):
    params = HawkesParams(lambda0=rng.uniform(0.01, 1.0),
        alpha=rng.uniform(0.0, 2.0), beta=rng.uniform(0.5, 3.0))
    history = random_history(rng, int(rng.integers(1, max_arrivals + 1)))
    costs = CostParams(c_p=rng.uniform(0.1, 2.0), c_cs=rng.uniform(0.1, 20.0))
    return params, history, costs


class WindowScheduleTest(TestCase):
    def test_can_reject_overlapping_windows(self):
        with self.assertRaises(InvalidParamsError):
            WindowSchedule([(0, 2), (1, 3)])

    def test_can_reject_empty_window(self):
        with self.assertRaises(InvalidParamsError):
            WindowSchedule([(1, 1)])

    def test_can_compute_cached_time(self):
        schedule = WindowSchedule([(1, 2), (3, 5)])

        self.assertEqual(0.0, schedule.cached_time(0.5))
        self.assertEqual(1.0, schedule.cached_time(2.5))
        self.assertEqual(2.0, schedule.cached_time(4.0))
        self.assertEqual(3.0, schedule.total_length)
        self.assertTrue(schedule.contains(3.0))
        self.assertFalse(schedule.contains(2.5))

    def test_zero_keep_alive_has_no_windows(self):
        self.assertEqual(0, len(WindowSchedule.keep_alive(0)))


class OptimalWindowTest(TestCase):
    def test_single_arrival_with_cheap_cold_start_gives_zero_window(self):
        params = HawkesParams(0.01, 0.5, 1.0)

        window = optimal_hawkes_window(params, [0.0], CostParams(1, 1))

        self.assertEqual(WindowKind.zero, window.kind)
        self.assertEqual(0.0, window.length)

    def test_single_arrival_gives_closed_form_window(self):
        params = HawkesParams(0.01, 0.5, 1.0)

        window = optimal_hawkes_window(params, [0.0], CostParams(1, 10))

        self.assertEqual(WindowKind.finite, window.kind)
        self.assertAlmostEqual(math.log(0.5 / 0.09), window.tau, places=12)
        self.assertAlmostEqual(1.71480, window.tau, places=5)

    def test_expensive_memory_below_baseline_gives_infinite_window(self):
        params = HawkesParams(0.5, 0.5, 1.0)

        window = optimal_hawkes_window(params, [0.0], CostParams(1, 1))

        self.assertEqual(WindowKind.infinite, window.kind)
        self.assertEqual(math.inf, window.length)

    def test_cost_ratio_equal_to_baseline_gives_infinite_window(self):
        params = HawkesParams(0.5, 0.5, 1.0)

        window = optimal_hawkes_window(params, [0.0], CostParams(1, 2))

        self.assertEqual(WindowKind.infinite, window.kind)

    def test_poisson_below_ratio_gives_zero_window(self):
        params = HawkesParams.poisson(0.05)

        window = optimal_hawkes_window(params, [0.0, 1.0], CostParams(1, 10))

        self.assertEqual(WindowKind.zero, window.kind)

    def test_can_reject_empty_history(self):
        params = HawkesParams(0.01, 0.5, 1.0)

        with self.assertRaises(DomainError):
            optimal_hawkes_window(params, [], CostParams(1, 10))

    def test_empty_history_window_counts_one_arrival(self):
        params = HawkesParams(0.01, 0.5, 1.0)
        costs = CostParams(1, 10)

        self.assertEqual(optimal_hawkes_window(params, [3.0], costs),
            empty_history_window(params, costs))

    def test_closed_form_matches_root_of_instantaneous_gain(self):
        rng = np.random.default_rng(2021)

        for _ in range(1000):
            params, history, costs = _random_finite_case(rng)

            window = optimal_hawkes_window(params, history, costs)
            if window.kind != WindowKind.finite:
                # the ratio was drawn too close to the peak intensity
                self.assertEqual(WindowKind.zero, window.kind)
                continue

            def gain(x):
                return costs.c_p - costs.c_cs * hazard(params, history, x)
            upper = 1.0
            while gain(upper) < 0:
                upper *= 2.0
            expected = brentq(gain, 0.0, upper, xtol=1e-13)

            self.assertAlmostEqual(expected, window.tau,
                delta=1e-9 * max(1.0, expected))

    def test_windows_are_monotone_in_cold_start_cost(self):
        params = HawkesParams(0.01, 0.5, 1.0)
        history = [0.0, 0.5, 0.7]

        lengths = [optimal_hawkes_window(params, history,
                CostParams(1, c_cs)).length
            for c_cs in [1, 2, 5, 10, 20, 50]]

        self.assertEqual(sorted(lengths), lengths)

    def test_windows_are_monotone_in_process_params(self):
        history = [0.0, 0.5, 0.7]
        costs = CostParams(1, 10)

        def lengths(params_list):
            return [optimal_hawkes_window(p, history, costs).length
                for p in params_list]

        by_alpha = lengths([HawkesParams(0.01, a, 1.0)
            for a in [0.05, 0.3, 0.5, 0.8, 1.2, 2.0]])
        by_lambda0 = lengths([HawkesParams(l, 0.5, 1.0)
            for l in [0.0, 0.01, 0.03, 0.06, 0.09]])
        by_beta = lengths([HawkesParams(0.01, 0.5, b)
            for b in [0.5, 1.0, 1.5, 2.0, 3.0]])

        self.assertEqual(sorted(by_alpha), by_alpha)
        self.assertEqual(sorted(by_lambda0), by_lambda0)
        self.assertEqual(sorted(by_beta, reverse=True), by_beta)
        self.assertLess(by_beta[-1], by_beta[0])

    def test_windows_are_monotone_on_random_histories(self):
        rng = np.random.default_rng(11)

        for _ in range(300):
            params, history, costs = _random_finite_case(rng)
            ratio = costs.c_p / costs.c_cs
            base = optimal_hawkes_window(params, history, costs).length

            more_alpha = attr.evolve(params, alpha=1.5 * params.alpha)
            more_lambda0 = attr.evolve(params,
                lambda0=0.5 * (params.lambda0 + ratio))
            more_beta = attr.evolve(params, beta=1.5 * params.beta)

            self.assertLessEqual(base, optimal_hawkes_window(more_alpha,
                history, costs).length + 1e-12)
            self.assertLessEqual(base, optimal_hawkes_window(more_lambda0,
                history, costs).length + 1e-12)
            self.assertLessEqual(optimal_hawkes_window(more_beta,
                history, costs).length, base + 1e-12)
            self.assertLessEqual(optimal_hawkes_window(params, history,
                CostParams(2 * costs.c_p, costs.c_cs)).length, base + 1e-12)

    def test_truncation_keeps_recent_arrivals_only(self):
        params = HawkesParams(0.01, 0.5, 1.0)
        costs = CostParams(1, 10)
        history = [0.0, 0.1, 0.2, 50.0]

        self.assertEqual(optimal_hawkes_window(params, [50.0], costs),
            optimal_hawkes_window(params, history, costs, truncation=1))

    def test_can_compute_windows_from_weights(self):
        params = HawkesParams(0.01, 0.5, 1.0)
        costs = CostParams(1, 10)

        lengths = windows_from_weights(params, [1.0, 0.1, 2.0], costs)

        self.assertAlmostEqual(math.log(0.5 / 0.09), lengths[0])
        self.assertEqual(0.0, lengths[1])
        self.assertAlmostEqual(math.log(1.0 / 0.09), lengths[2])


class HistoryWeightsTest(TestCase):
    def test_truncated_weights_match_direct_sums(self):
        rng = np.random.default_rng(7)
        t = random_history(rng, 300, max_gap=0.5)
        beta = 0.8

        weights = history_weights(t, beta, truncation=20, chunk_size=64)

        expected = [np.sum(np.exp(beta * (t[max(0, i - 19):i + 1] - t[i])))
            for i in range(len(t))]
        np.testing.assert_allclose(weights, expected, rtol=1e-12)

    def test_short_history_is_not_truncated(self):
        t = [0.0, 1.0, 1.5]

        np.testing.assert_allclose(history_weights(t, 1.0, truncation=200),
            [1.0, 1.0 + math.exp(-1.0),
                1.0 + math.exp(-0.5) + math.exp(-1.5)])


class HazardScheduleTest(TestCase):
    def test_decreasing_hazard_gives_single_window(self):
        params = HawkesParams(0.01, 0.5, 1.0)
        costs = CostParams(1, 10)
        history = [0.0]

        schedule = windows_from_hazard(lambda x: hazard(params, history, x),
            costs, horizon=50.0)

        self.assertEqual(1, len(schedule))
        start, end = schedule.windows[0]
        self.assertEqual(0.0, start)
        self.assertAlmostEqual(math.log(0.5 / 0.09), end, places=6)

    def test_oscillating_hazard_gives_several_windows(self):
        schedule = windows_from_hazard(lambda x: 1.0 + math.sin(x),
            CostParams(1, 1), horizon=10.0)

        self.assertEqual(2, len(schedule))
        (s1, e1), (s2, e2) = schedule.windows
        self.assertEqual(0.0, s1)
        self.assertAlmostEqual(math.pi, e1, places=6)
        self.assertAlmostEqual(2 * math.pi, s2, places=6)
        self.assertAlmostEqual(3 * math.pi, e2, places=6)

    def test_step_hazard_gives_window_around_the_dip(self):
        def step(x):
            return 0.1 if 1.0 <= x < 3.0 else 2.0

        schedule = windows_from_hazard(step, CostParams(1, 1), horizon=10.0)

        self.assertEqual(2, len(schedule))
        (s1, e1), (s2, e2) = schedule.windows
        self.assertEqual(0.0, s1)
        self.assertAlmostEqual(1.0, e1, delta=1e-3)
        self.assertAlmostEqual(3.0, s2, delta=1e-3)
        self.assertEqual(math.inf, e2)

    def test_increasing_hazard_gives_single_window_to_infinity(self):
        schedule = windows_from_hazard(lambda x: 0.5 * x, CostParams(1, 1),
            horizon=10.0)

        self.assertEqual(1, len(schedule))
        start, end = schedule.windows[0]
        self.assertAlmostEqual(2.0, start, places=6)
        self.assertEqual(math.inf, end)

    def test_weakly_increasing_hazard_gives_single_window_to_infinity(self):
        def ramp(x):
            return min(0.1 * math.floor(x), 2.0)

        schedule = windows_from_hazard(ramp, CostParams(1, 4), horizon=30.0)

        self.assertEqual(1, len(schedule))
        start, end = schedule.windows[0]
        self.assertAlmostEqual(3.0, start, delta=1e-2)
        self.assertEqual(math.inf, end)

    def test_window_open_at_horizon_is_infinite(self):
        schedule = windows_from_hazard(lambda x: 2.0, CostParams(1, 1),
            horizon=10.0)

        self.assertEqual(((0.0, math.inf), ), schedule.windows)

    def test_hazard_below_ratio_gives_no_windows(self):
        schedule = windows_from_hazard(lambda x: 0.1, CostParams(1, 1),
            horizon=10.0)

        self.assertEqual(0, len(schedule))


class BoundsTest(TestCase):
    def test_bounds_contain_optimal_window(self):
        rng = np.random.default_rng(5)

        for _ in range(500):
            params, history, costs = _random_finite_case(rng, 100)

            window = optimal_hawkes_window(params, history, costs)
            bounds = window_bounds(params, history, costs)

            self.assertLessEqual(bounds.lower, window.length + 1e-12)
            self.assertLessEqual(window.length, bounds.upper + 1e-12)
            self.assertLessEqual(1, bounds.delta)

    def test_can_reject_bounds_of_infinite_regime(self):
        params = HawkesParams(0.5, 0.5, 1.0)

        with self.assertRaises(DomainError):
            window_bounds(params, [0.0], CostParams(1, 1))


class FixedLengthTest(TestCase):
    def test_approx_equals_fixed_without_empty_history_window(self):
        params = HawkesParams(0.01, 0.5, 1.0)
        costs = CostParams(1, 1)

        self.assertEqual(0.0, empty_history_window(params, costs).length)
        self.assertAlmostEqual(tau_fixed(costs), tau_approx(params, costs))

    def test_approx_ratio_bound_is_one_for_infinite_window(self):
        params = HawkesParams(0.5, 0.5, 1.0)

        self.assertEqual(1.0, approx_ratio_bound(params, CostParams(1, 1)))
        self.assertEqual(math.inf, tau_approx(params, CostParams(1, 1)))

    def test_ttl_ratio_bound_matches_known_cases(self):
        params = HawkesParams(0.01, 0.5, 1.0)
        costs = CostParams(1, 10)
        tau_empty = empty_history_window(params, costs).length

        self.assertEqual(2.0, ttl_ratio_bound(tau_fixed(costs), 0.0, costs))
        self.assertAlmostEqual(approx_ratio_bound(params, costs),
            ttl_ratio_bound(tau_approx(params, costs), tau_empty, costs))
        self.assertEqual(math.inf, ttl_ratio_bound(0.0, tau_empty, costs))

    def test_fixed_window_costs_at_most_twice_the_optimal(self):
        rng = np.random.default_rng(9)

        for _ in range(10000):
            params, history, costs = _random_case(rng)
            x = rng.exponential(5.0)

            optimal = optimal_hawkes_window(params, history, costs)
            fixed = WindowSchedule.keep_alive(tau_fixed(costs))

            fixed_cost = realized_cost(x, fixed, costs).cost
            self.assertLessEqual(fixed_cost, 2.0 * realized_cost(x,
                optimal.to_schedule(), costs).cost * (1 + 1e-12))
            self.assertLessEqual(fixed_cost,
                2.0 * offline_optimal_cost(x, costs) * (1 + 1e-12))

    def test_approx_window_respects_ratio_bound(self):
        rng = np.random.default_rng(10)

        for _ in range(10000):
            params, history, costs = _random_case(rng)
            x = 1e-3 + rng.exponential(5.0)

            optimal = optimal_hawkes_window(params, history, costs)
            approx = WindowSchedule.keep_alive(tau_approx(params, costs))

            ratio = realized_cost(x, approx, costs).cost / \
                realized_cost(x, optimal.to_schedule(), costs).cost
            self.assertLessEqual(ratio,
                approx_ratio_bound(params, costs) + 1e-9)

    def test_offline_cost_picks_cheaper_option(self):
        costs = CostParams(1, 10)

        self.assertEqual(4.0, offline_optimal_cost(4.0, costs))
        self.assertEqual(10.0, offline_optimal_cost(12.0, costs))
        self.assertEqual(offline_optimal_cost(12.0, costs),
            offline_optimal_outcome(12.0, costs).cost)


class OptimizedTtlTest(TestCase):
    def test_optimized_ttl_is_mean_of_optimal_windows(self):
        self.assertAlmostEqual(1.0, optimized_ttl_from_lengths([0, 1, 2]))
        self.assertEqual(math.inf, optimized_ttl_from_lengths([1, math.inf]))

    def test_optimized_ttl_is_reproducible(self):
        params = HawkesParams(0.01, 0.5, 1.0)
        costs = CostParams(1, 10)
        sim = SimConfig(seed=3, n_events=600)

        self.assertEqual(optimized_ttl(params, costs, sim),
            optimized_ttl(params, costs, sim))
        self.assertLess(0.0, optimized_ttl(params, costs, sim))

    def test_can_reject_too_short_simulation(self):
        params = HawkesParams(0.01, 0.5, 1.0)

        with self.assertRaises(InsufficientDataError):
            optimized_ttl(params, CostParams(1, 10),
                SimConfig(seed=3, n_events=1))


class PolicySpecTest(TestCase):
    def test_can_tell_which_policies_need_params(self):
        self.assertFalse(PolicySpec.fixed(10).requires_params)
        self.assertFalse(PolicySpec.offline().requires_params)
        self.assertFalse(PolicySpec.optimized(ttl=3).requires_params)
        self.assertTrue(PolicySpec.optimized().requires_params)
        self.assertTrue(PolicySpec.optimal().requires_params)
        self.assertTrue(PolicySpec.approx().requires_params)

    def test_can_parse_kind_from_string(self):
        self.assertEqual(PolicyKind.fixed, PolicySpec('fixed', ttl=1).kind)

    def test_can_reject_fixed_policy_without_ttl(self):
        with self.assertRaises(InvalidParamsError):
            PolicySpec(PolicyKind.fixed)

    def test_prewarm_policy_shifts_window(self):
        schedule = PolicySpec.prewarmed(2, 3).schedule_for([0.0])

        self.assertEqual(((2.0, 5.0), ), schedule.windows)

    def test_offline_policy_has_no_schedule(self):
        with self.assertRaises(DomainError):
            PolicySpec.offline().schedule_for([0.0])

    def test_optimal_policy_uses_closed_form(self):
        params = HawkesParams(0.01, 0.5, 1.0)
        costs = CostParams(1, 10)

        schedule = PolicySpec.optimal().schedule_for([0.0], params, costs)

        self.assertEqual(1, len(schedule))
        start, end = schedule.windows[0]
        self.assertEqual(0.0, start)
        self.assertAlmostEqual(math.log(0.5 / 0.09), end)
