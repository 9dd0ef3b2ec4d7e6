import math

import numpy as np
from django.core.exceptions import ValidationError
from django.test import SimpleTestCase

from analytic.solutions import solve_a_exports, solve_bilateral
from core.models import DepletionPolicy, GoodEconomy, MoneyState, NormalizedState, PriceSet, Regime
from money.rates import one_good_money_rates
from steady.fixed_points import fixed_point_economy

from .models import SolverOptions
from .runge_kutta import _rk4, integrate_with_events, rk4_step, stock_field, stock_stepper

# eta_b runs out at t = 0.2 while nothing is exchanged.
DRAINING = GoodEconomy(p_a=1.0, p_b=0.0, c_a=1.0, c_b=1.0, sigma=1.0)
DRAINING_START = NormalizedState(0.5, 0.2)


class SolverOptionsTests(SimpleTestCase):
    def test_defaults(self):
        opts = SolverOptions(horizon=10.0)
        self.assertEqual((opts.step, opts.event_tol), (1e-3, 1e-10))
        self.assertEqual(opts.depletion_policy, DepletionPolicy.HALT)

    def test_invalid_values_reported_together(self):
        with self.assertRaises(ValidationError) as ctx:
            SolverOptions(horizon=0.0, step=-1.0, event_tol=0.0)
        self.assertEqual(set(ctx.exception.message_dict), {'horizon', 'step', 'event_tol'})

    def test_step_longer_than_horizon(self):
        with self.assertRaises(ValidationError) as ctx:
            SolverOptions(horizon=1.0, step=2.0)
        self.assertIn('step', ctx.exception.message_dict)

    def test_non_finite_values_rejected(self):
        with self.assertRaises(ValidationError) as ctx:
            SolverOptions(horizon=math.inf, event_tol=math.nan)
        self.assertEqual(set(ctx.exception.message_dict), {'horizon', 'event_tol'})


class Rk4StepTests(SimpleTestCase):
    def test_linear_drift(self):
        econ = GoodEconomy(p_a=1.5, p_b=0.5, c_a=1.0, c_b=1.0, sigma=0.0)
        state = rk4_step(NormalizedState(0.25, 0.75), econ, 0.5)
        self.assertAlmostEqual(state.eta_a, 0.5, delta=1e-15)
        self.assertAlmostEqual(state.eta_b, 0.5, delta=1e-15)

    def test_unrolled_step_matches_generic(self):
        rng = np.random.default_rng(5)
        for _ in range(200):
            p_a, p_b, c_a, c_b, sigma = (float(v) for v in rng.uniform(0, 5, size=5))
            econ = GoodEconomy(p_a=p_a, p_b=p_b, c_a=c_a, c_b=c_b, sigma=sigma)
            y = tuple(float(v) for v in rng.uniform(0, 3, size=2))
            h = float(rng.uniform(1e-4, 0.5))
            self.assertEqual(stock_stepper(econ)(y, h), _rk4(y, stock_field(econ), h))

    def test_step_must_be_positive(self):
        with self.assertRaises(ValidationError):
            rk4_step(NormalizedState(0.5, 0.5), DRAINING, 0.0)

    def test_fourth_order_convergence(self):
        econ = GoodEconomy(p_a=1.0, p_b=0.0, c_a=0.5, c_b=1.0, sigma=2.0)
        state0 = NormalizedState(1.5, 0.5)
        exact = solve_a_exports(state0, econ, 1.0)

        def error(step):
            final = integrate_with_events(state0, econ, opts=SolverOptions(horizon=1.0, step=step)).final_state
            return max(abs(final.eta_a - exact.eta_a), abs(final.eta_b - exact.eta_b))

        self.assertGreaterEqual(error(0.1) / error(0.05), 12.0)
        self.assertGreaterEqual(error(0.05) / error(0.025), 12.0)

    def test_fourth_order_convergence_bilateral(self):
        econ = GoodEconomy(p_a=2.0, p_b=1.2, c_a=1.0, c_b=1.0, sigma=1.5)
        state0 = NormalizedState(2.0, 1.2)
        exact = solve_bilateral(state0, econ, 1.0)

        def error(step):
            final = integrate_with_events(state0, econ, opts=SolverOptions(horizon=1.0, step=step)).final_state
            return max(abs(final.eta_a - exact.eta_a), abs(final.eta_b - exact.eta_b))

        self.assertGreaterEqual(error(0.1) / error(0.05), 12.0)


class IntegrateWithEventsTests(SimpleTestCase):
    def test_options_required(self):
        with self.assertRaises(ValidationError):
            integrate_with_events(DRAINING_START, DRAINING)

    def test_samples_end_at_horizon(self):
        series = integrate_with_events(
            NormalizedState(0.5, 0.5), DRAINING, opts=SolverOptions(horizon=0.1, step=0.03),
        )
        self.assertEqual(series.times[0], 0.0)
        self.assertEqual(series.times[-1], 0.1)
        self.assertTrue(np.all(np.diff(series.times) > 0))
        self.assertEqual(len(series), len(series.regimes))
        self.assertIsNone(series.money)

    def test_threshold_event_and_regime_switch(self):
        econ = GoodEconomy(p_a=1.25, p_b=1.0, c_a=1.0, c_b=1.0, sigma=1.0)
        series = integrate_with_events(NormalizedState(0.5, 0.5), econ, opts=SolverOptions(horizon=3.0))
        event = series.events[0]
        self.assertEqual((event.component, event.direction, event.kind), ('eta_a', 'upward', 'threshold'))
        self.assertAlmostEqual(event.time, 2.0, delta=1e-9)
        row = int(np.searchsorted(series.times, event.time))
        self.assertEqual(series.times[row], event.time)
        self.assertEqual(series.regimes[row], Regime.A_EXPORTS)
        self.assertEqual(series.regimes[row - 1], Regime.NO_EXCHANGE)

    def test_downward_crossing(self):
        econ = GoodEconomy(p_a=0.0, p_b=1.0, c_a=1.0, c_b=1.0, sigma=1.0)
        series = integrate_with_events(NormalizedState(1.2, 0.5), econ, opts=SolverOptions(horizon=1.0))
        self.assertEqual(series.events[0].direction, 'downward')
        self.assertEqual(series.regimes[-1], Regime.NO_EXCHANGE)


class DepletionPolicyTests(SimpleTestCase):
    def run_policy(self, policy, horizon=1.0):
        return integrate_with_events(
            DRAINING_START, DRAINING, opts=SolverOptions(horizon=horizon, step=1e-2, depletion_policy=policy),
        )

    def test_halt_stops_at_depletion(self):
        series = self.run_policy(DepletionPolicy.HALT)
        self.assertTrue(series.halted)
        event = series.events[-1]
        self.assertEqual((event.component, event.kind), ('eta_b', 'depletion'))
        self.assertAlmostEqual(event.time, 0.2, delta=1e-9)
        self.assertEqual(series.times[-1], event.time)
        self.assertLessEqual(abs(series.final_state.eta_b), 1e-9)

    def test_clamp_holds_at_zero(self):
        series = self.run_policy(DepletionPolicy.CLAMP_TO_ZERO)
        self.assertFalse(series.halted)
        self.assertEqual([event.kind for event in series.events], ['depletion'])
        self.assertEqual(series.final_state.eta_b, 0.0)
        self.assertTrue(np.all(series.stocks[:, 1] >= 0.0))

    def test_continue_goes_negative(self):
        series = self.run_policy(DepletionPolicy.CONTINUE)
        self.assertFalse(series.halted)
        self.assertEqual(len(series.events), 1)
        self.assertAlmostEqual(series.final_state.eta_b, -0.8, delta=1e-12)


class MoneyIntegrationTests(SimpleTestCase):
    def test_money_grows_at_fixed_point_rates(self):
        prices = PriceSet(x_a=1.0, x_b=3.0, y=2.0)
        econ = fixed_point_economy(1.5, c_a=1.0, c_b=2.0, sigma=1.0)
        series = integrate_with_events(
            NormalizedState(1.5, 1.0), econ, prices, SolverOptions(horizon=10.0, step=1e-2), MoneyState(5.0, -1.0),
        )
        dm_a, dm_b = one_good_money_rates(econ, prices, 1.5)
        self.assertEqual(series.money_states[0], MoneyState(5.0, -1.0))
        expected = np.column_stack([5.0 + dm_a * series.times, -1.0 + dm_b * series.times])
        self.assertLessEqual(float(np.max(np.abs(series.money - expected))), 1e-9)
        self.assertEqual(series.final_state, NormalizedState(1.5, 1.0))

    def test_money_starts_at_zero_by_default(self):
        series = integrate_with_events(
            NormalizedState(0.5, 0.5), DRAINING, PriceSet(x_a=1.0, x_b=3.0, y=2.0), SolverOptions(horizon=0.1),
        )
        self.assertEqual(tuple(series.money[0]), (0.0, 0.0))


class DeterminismTests(SimpleTestCase):
    def test_identical_runs(self):
        econ = GoodEconomy(p_a=2.0, p_b=0.5, c_a=1.0, c_b=0.75, sigma=1.3)
        opts = SolverOptions(horizon=5.0, depletion_policy=DepletionPolicy.CONTINUE)
        first = integrate_with_events(NormalizedState(0.3, 1.4), econ, opts=opts)
        second = integrate_with_events(NormalizedState(0.3, 1.4), econ, opts=opts)
        np.testing.assert_array_equal(first.times, second.times)
        np.testing.assert_array_equal(first.stocks, second.stocks)
        self.assertEqual(first.events, second.events)


class EventBracketingTests(SimpleTestCase):
    """The sample taken at an event sits on the guard it reports."""

    def test_samples_at_events_sit_on_the_guard(self):
        rng = np.random.default_rng(31)
        opts = SolverOptions(horizon=5.0, depletion_policy=DepletionPolicy.CONTINUE)
        checked = 0
        for _ in range(60):
            p_a, p_b, c_a, c_b, sigma = (float(v) for v in rng.uniform(0, 2, size=5))
            state0 = NormalizedState(*(float(v) for v in rng.uniform(0, 2, size=2)))
            econ = GoodEconomy(p_a=p_a, p_b=p_b, c_a=c_a, c_b=c_b, sigma=sigma)
            series = integrate_with_events(state0, econ, opts=opts)
            for event in series.events:
                row = int(np.flatnonzero(series.times == event.time)[0])
                column = 0 if event.component == 'eta_a' else 1
                level = 1.0 if event.kind == 'threshold' else 0.0
                self.assertLessEqual(abs(series.stocks[row, column] - level), 1e-8, f'{event} econ={econ}')
                checked += 1
        self.assertGreater(checked, 10)
