import numpy as np
from django.test import SimpleTestCase

from core.models import GoodEconomy, NormalizedState, Regime

from .flow import classify_regime, exchange_flow, flow_value, regime_after, rhs


def econ(p_a=1.0, p_b=1.0, c_a=1.0, c_b=1.0, sigma=1.0):
    return GoodEconomy(p_a=p_a, p_b=p_b, c_a=c_a, c_b=c_b, sigma=sigma)


class ExchangeFlowTests(SimpleTestCase):
    def test_branches(self):
        self.assertEqual(exchange_flow(NormalizedState(0.5, 0.8)), 0.0)
        self.assertEqual(exchange_flow(NormalizedState(1.5, 0.5)), 0.5)
        self.assertAlmostEqual(exchange_flow(NormalizedState(1.2, 1.7)), -0.5, places=12)
        self.assertEqual(exchange_flow(NormalizedState(1.0, 1.0)), 0.0)

    def test_continuous_at_guard(self):
        rng = np.random.default_rng(1)
        for _ in range(1000):
            other = float(rng.uniform(0, 3))
            delta = float(rng.uniform(0, 1e-3))
            at = flow_value(1.0, other)
            self.assertLessEqual(abs(flow_value(1.0 + delta, other) - at), delta + 1e-15)
            self.assertLessEqual(abs(flow_value(1.0 - delta, other) - at), delta + 1e-15)
            at = flow_value(other, 1.0)
            self.assertLessEqual(abs(flow_value(other, 1.0 + delta) - at), delta + 1e-15)

    def test_bilateral_antisymmetry_and_signs(self):
        rng = np.random.default_rng(2)
        for _ in range(1000):
            a, b = (float(v) for v in rng.uniform(1.0, 3.0, size=2))
            if a > 1 and b > 1:
                self.assertEqual(flow_value(a, b), -flow_value(b, a))
            below = float(rng.uniform(0, 1))
            self.assertGreaterEqual(flow_value(a, below), 0.0)
            self.assertLessEqual(flow_value(below, b), 0.0)


class ClassifyRegimeTests(SimpleTestCase):
    def test_cases(self):
        self.assertEqual(classify_regime(NormalizedState(0.9, 0.9)), Regime.NO_EXCHANGE)
        self.assertEqual(classify_regime(NormalizedState(1.5, 0.8)), Regime.A_EXPORTS)
        self.assertEqual(classify_regime(NormalizedState(0.8, 1.5)), Regime.B_EXPORTS)
        self.assertEqual(classify_regime(NormalizedState(1.2, 1.7)), Regime.BILATERAL)

    def test_threshold_counts_as_below(self):
        self.assertEqual(classify_regime(NormalizedState(1.0, 1.0)), Regime.NO_EXCHANGE)
        self.assertEqual(classify_regime(NormalizedState(1.0, 1.5)), Regime.B_EXPORTS)


class RhsTests(SimpleTestCase):
    def test_balanced_without_exchange(self):
        self.assertEqual(rhs(NormalizedState(0.5, 0.5), econ(p_a=1, c_a=1, p_b=2, c_b=2, sigma=5)), (0.0, 0.0))

    def test_a_exports_substitution(self):
        result = rhs(NormalizedState(1.5, 0.5), econ(p_a=1, c_a=0.5, p_b=0, c_b=0, sigma=2))
        self.assertEqual(result, (-0.5, 1.0))

    def test_decoupled_without_sigma(self):
        self.assertEqual(rhs(NormalizedState(2.5, 1.7), econ(p_a=3, c_a=1, p_b=0, c_b=0.5, sigma=0)), (2.0, -0.5))

    def test_total_rate_is_conserved(self):
        rng = np.random.default_rng(3)
        for _ in range(1000):
            p_a, p_b, c_a, c_b = (float(v) for v in rng.integers(0, 6, size=4))
            sigma = float(rng.uniform(0, 5))
            state = NormalizedState(*(float(v) for v in rng.uniform(0, 3, size=2)))
            deta_a, deta_b = rhs(state, econ(p_a=p_a, p_b=p_b, c_a=c_a, c_b=c_b, sigma=sigma))
            self.assertAlmostEqual(deta_a + deta_b, (p_a - c_a) + (p_b - c_b), delta=1e-12 * (1 + 5 * sigma * 3))


class RegimeAfterTests(SimpleTestCase):
    def test_off_guard_is_classification(self):
        state = NormalizedState(1.5, 0.5)
        self.assertEqual(regime_after(state, econ()), classify_regime(state))

    def test_guard_follows_first_derivative(self):
        rising = econ(p_a=1.25, c_a=1.0)
        falling = econ(p_a=0.75, c_a=1.0)
        self.assertEqual(regime_after(NormalizedState(1.0, 0.5), rising), Regime.A_EXPORTS)
        self.assertEqual(regime_after(NormalizedState(1.0, 0.5), falling), Regime.NO_EXCHANGE)

    def test_stationary_exporter_keeps_importer_below(self):
        # eta = (1.5, 1) with P_A = C_A + 0.5 sigma: B sits on the guard with zero motion.
        cooperative = econ(p_a=1.5, c_a=1.0, p_b=1.5, c_b=2.0, sigma=1.0)
        self.assertEqual(regime_after(NormalizedState(1.5, 1.0), cooperative), Regime.A_EXPORTS)

    def test_second_derivative_breaks_tie(self):
        # eta_a on the guard and momentarily still; B above decides where it goes.
        b_rising = econ(p_a=0.5, c_a=1.0, p_b=2.0, c_b=1.0, sigma=1.0)
        b_falling = econ(p_a=0.5, c_a=1.0, p_b=1.0, c_b=1.0, sigma=1.0)
        self.assertEqual(regime_after(NormalizedState(1.0, 1.5), b_rising), Regime.BILATERAL)
        self.assertEqual(regime_after(NormalizedState(1.0, 1.5), b_falling), Regime.B_EXPORTS)
