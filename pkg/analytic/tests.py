import math
import time

import numpy as np
from django.core.exceptions import ValidationError
from django.test import SimpleTestCase

from core.exceptions import ChatterError, EventLocalizationError
from core.models import DepletionPolicy, GoodEconomy, NormalizedState, Regime
from exchange.flow import regime_after, rhs
from integrator.models import SolverOptions
from integrator.runge_kutta import integrate_with_events

from .solutions import (
    ComponentLaw, _exit_time, first_crossing, propagate, simulate_analytic, solve_a_exports, solve_b_exports,
    solve_bilateral, solve_no_exchange,
)

SOLVERS = {
    Regime.NO_EXCHANGE: solve_no_exchange,
    Regime.A_EXPORTS: solve_a_exports,
    Regime.B_EXPORTS: solve_b_exports,
    Regime.BILATERAL: solve_bilateral,
}


def economy(net_a=0.0, net_b=0.0, sigma=1.0, c_a=1.0, c_b=1.0):
    return GoodEconomy(p_a=c_a + net_a, p_b=c_b + net_b, c_a=c_a, c_b=c_b, sigma=sigma)


def random_scenario(rng):
    p_a, p_b, c_a, c_b, sigma = (float(v) for v in rng.uniform(0, 5, size=5))
    state = NormalizedState(*(float(v) for v in rng.uniform(0, 3, size=2)))
    return state, GoodEconomy(p_a=p_a, p_b=p_b, c_a=c_a, c_b=c_b, sigma=sigma)


def assert_state_close(case, got, expected, tol):
    case.assertLessEqual(abs(got.eta_a - expected.eta_a), tol, f'{got} != {expected}')
    case.assertLessEqual(abs(got.eta_b - expected.eta_b), tol, f'{got} != {expected}')


class ComponentLawTests(SimpleTestCase):
    def test_turning_time(self):
        # 2 tau + 4 expm1(-tau) turns where 2 = 4 e^{-tau}
        law = ComponentLaw(0.0, 2.0, 4.0, 1.0)
        self.assertAlmostEqual(law.turning_time(), math.log(2.0), places=15)
        self.assertAlmostEqual(law.derivative(law.turning_time()), 0.0, places=12)

    def test_monotone_law_has_no_turn(self):
        self.assertIsNone(ComponentLaw(0.0, 1.0, -2.0, 1.0).turning_time())
        self.assertIsNone(ComponentLaw(0.0, 1.0).turning_time())


class SolveNoExchangeTests(SimpleTestCase):
    def test_linear_drift(self):
        got = solve_no_exchange(NormalizedState(0.5, 0.5), economy(0.1, -0.1), 2.0)
        assert_state_close(self, got, NormalizedState(0.7, 0.3), 1e-15)

    def test_balanced_is_unchanged(self):
        state = NormalizedState(0.3, 0.9)
        self.assertEqual(solve_no_exchange(state, economy(), 123.0), state)

    def test_zero_step_is_identity(self):
        state = NormalizedState(0.3, 0.9)
        self.assertEqual(solve_no_exchange(state, economy(0.1, 0.2), 0.0), state)

    def test_negative_step_rejected(self):
        with self.assertRaises(ValidationError):
            solve_no_exchange(NormalizedState(0.3, 0.9), economy(), -1.0)


class SolveAExportsTests(SimpleTestCase):
    def test_relaxation(self):
        econ = GoodEconomy(p_a=1.0, p_b=0.0, c_a=0.5, c_b=0.0, sigma=2.0)
        got = solve_a_exports(NormalizedState(1.5, 0.5), econ, 1.0)
        self.assertAlmostEqual(got.eta_a, 1.25 + 0.25 * math.exp(-2.0), places=14)
        self.assertAlmostEqual(got.eta_a, 1.28383, places=5)

    def test_equilibrium_component_is_constant(self):
        econ = economy(net_a=0.5, net_b=-0.25, sigma=2.0)
        eta_star = (econ.net_a + econ.sigma) / econ.sigma
        for dt in (0.1, 1.0, 10.0):
            self.assertEqual(solve_a_exports(NormalizedState(eta_star, 0.2), econ, dt).eta_a, eta_star)

    def test_zero_step_is_identity(self):
        state = NormalizedState(1.5, 0.5)
        self.assertEqual(solve_a_exports(state, economy(sigma=2.0), 0.0), state)

    def test_sigma_zero_rejected(self):
        with self.assertRaises(ValidationError) as ctx:
            solve_a_exports(NormalizedState(1.5, 0.5), economy(sigma=0.0), 1.0)
        self.assertIn('sigma', ctx.exception.message_dict)

    def test_matches_integrator(self):
        # B drains, so it stays below the threshold.
        econ = GoodEconomy(p_a=1.0, p_b=0.0, c_a=0.5, c_b=1.0, sigma=2.0)
        state0 = NormalizedState(1.5, 0.5)
        series = integrate_with_events(state0, econ, opts=SolverOptions(horizon=1.0, step=1e-3))
        assert_state_close(self, series.final_state, solve_a_exports(state0, econ, 1.0), 1e-8)


class SolveBExportsTests(SimpleTestCase):
    def test_label_symmetry(self):
        rng = np.random.default_rng(11)
        for _ in range(200):
            state, econ = random_scenario(rng)
            econ = GoodEconomy(p_a=econ.p_a, p_b=econ.p_b, c_a=econ.c_a, c_b=econ.c_b, sigma=econ.sigma + 0.1)
            dt = float(rng.uniform(0, 5))
            self.assertEqual(
                solve_b_exports(state.swapped(), econ.swapped(), dt),
                solve_a_exports(state, econ, dt).swapped(),
            )

    def test_equilibrium_component_is_constant(self):
        econ = economy(net_a=-0.25, net_b=0.5, sigma=2.0)
        eta_star = (econ.net_b + econ.sigma) / econ.sigma
        self.assertEqual(solve_b_exports(NormalizedState(0.2, eta_star), econ, 3.0).eta_b, eta_star)

    def test_matches_integrator(self):
        econ = GoodEconomy(p_a=0.0, p_b=1.0, c_a=1.0, c_b=0.5, sigma=2.0)
        state0 = NormalizedState(0.5, 1.5)
        series = integrate_with_events(state0, econ, opts=SolverOptions(horizon=1.0, step=1e-3))
        assert_state_close(self, series.final_state, solve_b_exports(state0, econ, 1.0), 1e-8)


class SolveBilateralTests(SimpleTestCase):
    def test_symmetric_rise(self):
        econ = economy(net_a=0.3, net_b=0.3, sigma=1.5)
        got = solve_bilateral(NormalizedState(1.5, 1.5), econ, 2.0)
        self.assertEqual(got.eta_a, got.eta_b)
        self.assertAlmostEqual(got.eta_a, 1.5 + 0.3 * 2.0, places=14)

    def test_total_is_linear(self):
        rng = np.random.default_rng(12)
        for _ in range(200):
            state, econ = random_scenario(rng)
            econ = GoodEconomy(p_a=econ.p_a, p_b=econ.p_b, c_a=econ.c_a, c_b=econ.c_b, sigma=econ.sigma + 0.1)
            dt = float(rng.uniform(0, 5))
            got = solve_bilateral(state, econ, dt)
            self.assertAlmostEqual(got.total - state.total, econ.net_total * dt, delta=1e-12 * (1 + abs(got.total)))

    def test_worked_example(self):
        econ = economy(net_a=1.0, net_b=0.0, sigma=1.0)
        got = solve_bilateral(NormalizedState(2.0, 1.5), econ, 1.0)
        assert_state_close(self, got, NormalizedState(2.5, 2.0), 1e-15)

    def test_matches_integrator(self):
        econ = economy(net_a=1.0, net_b=0.2, sigma=1.0)
        state0 = NormalizedState(2.0, 1.2)
        series = integrate_with_events(state0, econ, opts=SolverOptions(horizon=1.0, step=1e-3))
        assert_state_close(self, series.final_state, solve_bilateral(state0, econ, 1.0), 1e-8)


class ClosedFormPropertyTests(SimpleTestCase):
    def test_semigroup(self):
        rng = np.random.default_rng(13)
        checked = 0
        while checked < 200:
            state, econ = random_scenario(rng)
            regime = regime_after(state, econ)
            t1, t2 = (float(v) for v in rng.uniform(0, 0.5, size=2))
            crossing = first_crossing(state, econ, t1 + t2)
            if crossing is not None or econ.sigma == 0:
                continue
            solve = SOLVERS[regime]
            assert_state_close(
                self, solve(solve(state, econ, t1), econ, t2), solve(state, econ, t1 + t2),
                1e-12 * (1 + abs(state.eta_a) + abs(state.eta_b) + 5 * (t1 + t2)),
            )
            checked += 1

    def test_initial_derivative_matches_rhs(self):
        rng = np.random.default_rng(14)
        h = 1e-7
        for _ in range(200):
            state, econ = random_scenario(rng)
            regime = regime_after(state, econ)
            forward = propagate(regime, state, econ, h)
            deta_a, deta_b = rhs(state, econ)
            self.assertAlmostEqual((forward.eta_a - state.eta_a) / h, deta_a, delta=1e-4)
            self.assertAlmostEqual((forward.eta_b - state.eta_b) / h, deta_b, delta=1e-4)


class FirstCrossingTests(SimpleTestCase):
    def test_linear_crossing(self):
        tau, component = first_crossing(NormalizedState(0.5, 0.5), economy(0.25, 0.0), 10.0)
        self.assertEqual(component, 'eta_a')
        self.assertAlmostEqual(tau, 2.0, delta=2e-10)

    def test_none_within_horizon(self):
        self.assertIsNone(first_crossing(NormalizedState(0.5, 0.5), economy(0.25, 0.0), 1.0))

    def test_importer_crossing(self):
        # A relaxes towards 1.25 and never leaves; B fills up from its imports.
        econ = economy(net_a=0.25, net_b=0.0, sigma=1.0)
        tau, component = first_crossing(NormalizedState(1.0 + 1e-3, 0.5), econ, 10.0)
        self.assertEqual(component, 'eta_b')
        self.assertGreater(tau, 0.0)

    def test_segment_starting_outside_is_reported(self):
        with self.assertRaises(EventLocalizationError) as ctx:
            _exit_time(ComponentLaw(2.0, 1.0), above=False, limit=5.0, event_tol=1e-10)
        self.assertIn('value_lo', ctx.exception.diagnostics)


class SimulateAnalyticTests(SimpleTestCase):
    def test_crossing_splits_trajectory(self):
        trajectory = simulate_analytic(NormalizedState(0.5, 0.5), economy(0.25, 0.0, sigma=1.0), 10.0)
        first, second = trajectory.segments[:2]
        self.assertEqual(first.regime, Regime.NO_EXCHANGE)
        self.assertEqual(first.t_start, 0.0)
        self.assertAlmostEqual(first.t_end, 2.0, delta=2e-10)
        self.assertEqual(second.regime, Regime.A_EXPORTS)
        self.assertEqual(trajectory.events[0].component, 'eta_a')
        self.assertEqual(trajectory.events[0].direction, 'upward')

    def test_without_sigma_dynamics_stay_linear(self):
        econ = economy(0.25, 0.0, sigma=0.0)
        trajectory = simulate_analytic(NormalizedState(0.5, 0.5), econ, 10.0)
        self.assertEqual(trajectory.regimes, [Regime.NO_EXCHANGE, Regime.A_EXPORTS])
        assert_state_close(self, trajectory.final_state, NormalizedState(3.0, 0.5), 1e-12)
        for t in (1.0, 2.5, 7.0):
            assert_state_close(self, trajectory.state_at(t), NormalizedState(0.5 + 0.25 * t, 0.5), 1e-12)

    def test_equilibrium_is_one_segment(self):
        econ = GoodEconomy(p_a=1.5, p_b=1.5, c_a=1.0, c_b=2.0, sigma=1.0)
        trajectory = simulate_analytic(NormalizedState(1.5, 1.0), econ, 100.0)
        self.assertEqual(len(trajectory.segments), 1)
        self.assertEqual(trajectory.final_state, NormalizedState(1.5, 1.0))

    def test_continuity_and_contiguity(self):
        rng = np.random.default_rng(15)
        for _ in range(50):
            state, econ = random_scenario(rng)
            trajectory = simulate_analytic(state, econ, 10.0)
            self.assertEqual(trajectory.segments[0].t_start, 0.0)
            self.assertEqual(trajectory.segments[-1].t_end, 10.0)
            for before, after in zip(trajectory.segments, trajectory.segments[1:]):
                self.assertIs(before.state_end, after.state_start)
                self.assertEqual(before.t_end, after.t_start)
                self.assertLess(after.t_start, after.t_end)

    def test_chatter_guard(self):
        with self.assertRaises(ChatterError):
            simulate_analytic(NormalizedState(0.5, 0.5), economy(0.25, 0.0), 10.0, max_segments=1)

    def test_preconditions(self):
        with self.assertRaises(ValidationError):
            simulate_analytic(NormalizedState(0.5, 0.5), economy(), 0.0)
        with self.assertRaises(ValidationError):
            simulate_analytic(NormalizedState(0.5, 0.5), economy(), 1.0, event_tol=0.0)

    def test_sample_shape(self):
        trajectory = simulate_analytic(NormalizedState(0.5, 0.5), economy(0.25, 0.0), 4.0)
        values = trajectory.sample([0.0, 2.0, 4.0])
        self.assertEqual(values.shape, (3, 2))
        self.assertEqual(tuple(values[0]), (0.5, 0.5))


class OracleEquivalenceTests(SimpleTestCase):
    """Closed forms against RK4 with event detection on random scenarios."""

    horizon = 10.0

    def test_random_scenarios(self):
        rng = np.random.default_rng(2024)
        opts = SolverOptions(horizon=self.horizon, step=1e-3, depletion_policy=DepletionPolicy.CONTINUE)
        started = time.perf_counter()
        for _ in range(100):
            state0, econ = random_scenario(rng)
            trajectory = simulate_analytic(state0, econ, self.horizon)
            series = integrate_with_events(state0, econ, opts=opts)
            analytic = trajectory.sample(series.times)
            worst = float(np.max(np.abs(analytic - series.stocks)))
            self.assertLessEqual(worst, 1e-6, f'state0={state0} econ={econ}')

            # Total stock grows at P_s across every switch.
            for values in (analytic, series.stocks):
                drift = values.sum(axis=1) - state0.total - econ.net_total * series.times
                self.assertLessEqual(float(np.max(np.abs(drift))), 1e-9, f'state0={state0} econ={econ}')
        self.assertLess(time.perf_counter() - started, 10.0)

    def test_event_times(self):
        rng = np.random.default_rng(99)
        opts = SolverOptions(horizon=self.horizon, step=1e-3, depletion_policy=DepletionPolicy.CONTINUE)
        found = 0
        while found < 50:
            state0, econ = random_scenario(rng)
            trajectory = simulate_analytic(state0, econ, self.horizon)
            if not trajectory.boundaries:
                continue
            series = integrate_with_events(state0, econ, opts=opts)
            crossings = [event for event in series.events if event.kind == 'threshold']
            self.assertTrue(crossings, f'state0={state0} econ={econ}')
            self.assertLessEqual(abs(crossings[0].time - trajectory.boundaries[0]), 1e-8)
            self.assertEqual(crossings[0].component, trajectory.events[0].component)
            found += 1
