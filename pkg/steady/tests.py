from django.core.exceptions import ValidationError
from django.test import SimpleTestCase

from analytic.solutions import simulate_analytic
from core.exceptions import InfeasibleProductionError
from core.models import GoodEconomy, NormalizedState, Regime
from exchange.flow import rhs
from integrator.models import SolverOptions
from integrator.runge_kutta import integrate_with_events

from .fixed_points import fixed_point_economy, fixed_point_production, is_steady_state, regime_equilibria


class FixedPointProductionTests(SimpleTestCase):
    def test_effort_shifts_production(self):
        self.assertEqual(fixed_point_production(1.5, c_a=1.0, c_b=2.0, sigma=1.0), (1.5, 1.5))

    def test_b_stops_producing_at_threshold(self):
        p_a, p_b = fixed_point_production(3.0, c_a=1.0, c_b=2.0, sigma=1.0)
        self.assertEqual((p_a, p_b), (3.0, 0.0))

    def test_beyond_threshold_is_infeasible(self):
        with self.assertRaises(InfeasibleProductionError) as ctx:
            fixed_point_production(4.0, c_a=1.0, c_b=2.0, sigma=1.0)
        self.assertEqual(ctx.exception.bound, 2.0)
        self.assertEqual(ctx.exception.production, -1.0)

    def test_stock_must_exceed_threshold(self):
        for eta in (1.0, 0.5):
            with self.assertRaises(ValidationError) as ctx:
                fixed_point_production(eta, c_a=1.0, c_b=2.0, sigma=1.0)
            self.assertIn('eta_a_star', ctx.exception.message_dict)


class SteadyStateTests(SimpleTestCase):
    """eta = (1 + eps, 1) with P_A = C_A + eps sigma and P_B = C_B - eps sigma."""

    epsilons = (0.1, 0.5, 1.0)

    def scenario(self, eps):
        return NormalizedState(1.0 + eps, 1.0), fixed_point_economy(1.0 + eps, c_a=1.0, c_b=2.0, sigma=1.0)

    def test_derivatives_vanish_exactly(self):
        for eps in self.epsilons:
            state, econ = self.scenario(eps)
            self.assertEqual(rhs(state, econ), (0.0, 0.0))
            self.assertTrue(is_steady_state(state, econ, tol=1e-300))

    def test_trajectories_stay_put(self):
        for eps in self.epsilons:
            state, econ = self.scenario(eps)
            trajectory = simulate_analytic(state, econ, 100.0)
            self.assertEqual(trajectory.regimes, [Regime.A_EXPORTS])
            series = integrate_with_events(state, econ, opts=SolverOptions(horizon=100.0, step=1e-2))
            for values in (trajectory.sample(series.times), series.stocks):
                self.assertLessEqual(float(abs(values[:, 0] - state.eta_a).max()), 1e-12)
                self.assertLessEqual(float(abs(values[:, 1] - state.eta_b).max()), 1e-12)
            self.assertEqual(series.events, [])

    def test_off_balance_is_not_steady(self):
        econ = GoodEconomy(p_a=2.0, p_b=1.0, c_a=1.0, c_b=2.0, sigma=1.0)
        self.assertFalse(is_steady_state(NormalizedState(1.5, 1.0), econ, tol=1e-12))

    def test_tolerance_must_be_positive(self):
        with self.assertRaises(ValidationError):
            is_steady_state(NormalizedState(1.5, 1.0), fixed_point_economy(1.5, 1.0, 2.0, 1.0), tol=0.0)


class RegimeEquilibriaTests(SimpleTestCase):
    def by_regime(self, econ):
        return {result.regime: result for result in regime_equilibria(econ)}

    def test_cooperative_economy(self):
        results = self.by_regime(fixed_point_economy(1.5, c_a=1.0, c_b=2.0, sigma=1.0))
        a_exports = results[Regime.A_EXPORTS]
        self.assertTrue(a_exports.exists)
        self.assertEqual(a_exports.attractor, {'eta_a': 1.5})
        self.assertEqual(a_exports.rate, 1.0)
        self.assertFalse(results[Regime.B_EXPORTS].exists)
        self.assertEqual(results[Regime.BILATERAL].rate, 2.0)
        self.assertFalse(results[Regime.NO_EXCHANGE].exists)

    def test_drifting_total_has_no_fixed_point(self):
        results = self.by_regime(GoodEconomy(p_a=2.0, p_b=1.0, c_a=1.0, c_b=0.5, sigma=1.0))
        self.assertFalse(results[Regime.A_EXPORTS].exists)
        self.assertIn('P_s', results[Regime.A_EXPORTS].note)
        self.assertFalse(results[Regime.BILATERAL].exists)
        self.assertEqual(results[Regime.BILATERAL].attractor, {'d': 0.25})

    def test_balanced_without_exchange(self):
        results = regime_equilibria(GoodEconomy(p_a=1.0, p_b=2.0, c_a=1.0, c_b=2.0, sigma=0.0))
        self.assertEqual(len(results), 1)
        self.assertTrue(results[0].exists)

    def test_balanced_bilateral_line(self):
        results = self.by_regime(GoodEconomy(p_a=2.0, p_b=1.0, c_a=1.0, c_b=2.0, sigma=2.0))
        self.assertTrue(results[Regime.BILATERAL].exists)
        self.assertEqual(results[Regime.BILATERAL].attractor, {'d': 0.5})
