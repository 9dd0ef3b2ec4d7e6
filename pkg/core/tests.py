import numpy as np
from django.core.exceptions import ValidationError
from django.test import SimpleTestCase

from .exceptions import InfeasibleProductionError, TradeflowError
from .models import (
    GoodEconomy, GuardEvent, MoneyState, NormalizedState, PriceSet, Regime, TwoGoodScenario,
    normalize_raw, validate_scenario,
)

REFERENCE_PRICES1 = PriceSet(x_a=1.0, x_b=3.0, y=2.0)
REFERENCE_PRICES2 = PriceSet(x_a=5.0, x_b=2.0, y=4.0)


def two_good(prices1=REFERENCE_PRICES1, prices2=REFERENCE_PRICES2, eta_a1=2.0, eta_b2=2.0):
    return TwoGoodScenario(
        good1=GoodEconomy(p_a=0, p_b=0, c_a=1, c_b=7, sigma=0),
        good2=GoodEconomy(p_a=0, p_b=0, c_a=5, c_b=2, sigma=0),
        prices1=prices1,
        prices2=prices2,
        eta_a1=eta_a1,
        eta_b2=eta_b2,
    )


class NormalizedStateTests(SimpleTestCase):
    def test_negative_stocks_are_representable(self):
        state = NormalizedState(-0.5, 2.0)
        self.assertEqual(state.total, 1.5)

    def test_non_finite_rejected(self):
        with self.assertRaises(ValidationError) as ctx:
            NormalizedState(float('nan'), 1.0)
        self.assertIn('eta_a', ctx.exception.message_dict)

    def test_swapped(self):
        self.assertEqual(NormalizedState(1.0, 2.0).swapped(), NormalizedState(2.0, 1.0))


class GoodEconomyTests(SimpleTestCase):
    def test_every_negative_rate_reported(self):
        with self.assertRaises(ValidationError) as ctx:
            GoodEconomy(p_a=-1, p_b=0, c_a=0, c_b=-2, sigma=-0.1)
        self.assertEqual(set(ctx.exception.message_dict), {'p_a', 'c_b', 'sigma'})

    def test_net_rates(self):
        econ = GoodEconomy(p_a=3, p_b=1, c_a=1, c_b=2, sigma=1)
        self.assertEqual((econ.net_a, econ.net_b), (2, -1))
        self.assertEqual(econ.net_total, 1)
        self.assertEqual(econ.net_difference, 3)

    def test_swapped_exchanges_labels(self):
        econ = GoodEconomy(p_a=3, p_b=1, c_a=1, c_b=2, sigma=0.5)
        self.assertEqual(econ.swapped(), GoodEconomy(p_a=1, p_b=3, c_a=2, c_b=1, sigma=0.5))


class PriceSetTests(SimpleTestCase):
    def test_advantage(self):
        self.assertEqual(REFERENCE_PRICES1.advantage, 'a')
        self.assertEqual(REFERENCE_PRICES2.advantage, 'b')
        self.assertIsNone(PriceSet(x_a=2, x_b=3, y=2).advantage)

    def test_swapped_flips_advantage(self):
        self.assertEqual(REFERENCE_PRICES1.swapped().advantage, 'b')


class RegimeTests(SimpleTestCase):
    def test_sides_round_trip(self):
        for regime in Regime:
            self.assertEqual(Regime.from_sides(regime.a_above, regime.b_above), regime)

    def test_swapped(self):
        self.assertEqual(Regime.A_EXPORTS.swapped(), Regime.B_EXPORTS)
        self.assertEqual(Regime.BILATERAL.swapped(), Regime.BILATERAL)
        self.assertEqual(Regime.NO_EXCHANGE.swapped(), Regime.NO_EXCHANGE)


class ValidateScenarioTests(SimpleTestCase):
    def test_reference_prices_are_valid(self):
        self.assertEqual(validate_scenario(two_good()), [])

    def test_price_equal_to_cost_violates_strict_advantage(self):
        violations = validate_scenario(two_good(prices1=PriceSet(x_a=2, x_b=3, y=2)))
        self.assertEqual(len(violations), 1)
        self.assertTrue(violations[0].startswith('prices1: x_a < y'))

    def test_eta_at_threshold_rejected(self):
        violations = validate_scenario(two_good(eta_a1=1.0))
        self.assertEqual(violations, ['eta_a1 > 1 required (got 1.0)'])

    def test_every_violation_listed(self):
        violations = validate_scenario(two_good(
            prices1=PriceSet(x_a=3, x_b=1, y=2), prices2=PriceSet(x_a=2, x_b=5, y=4), eta_a1=0.5, eta_b2=1.0,
        ))
        self.assertEqual(len(violations), 6)

    def test_agrees_with_direct_inequalities(self):
        rng = np.random.default_rng(7)
        for _ in range(500):
            x_a1, y1, x_b1, x_a2, y2, x_b2 = (float(v) for v in rng.integers(0, 4, size=6))
            eta_a1, eta_b2 = (float(v) for v in rng.choice([0.5, 1.0, 1.5], size=2))
            scenario = two_good(
                prices1=PriceSet(x_a=x_a1, x_b=x_b1, y=y1),
                prices2=PriceSet(x_a=x_a2, x_b=x_b2, y=y2),
                eta_a1=eta_a1, eta_b2=eta_b2,
            )
            expected = (x_a1 < y1 < x_b1) and (x_b2 < y2 < x_a2) and eta_a1 > 1 and eta_b2 > 1
            self.assertEqual(validate_scenario(scenario) == [], expected)

    def test_with_eta_a1(self):
        self.assertEqual(two_good().with_eta_a1(3.0).eta_a1, 3.0)


class NormalizeRawTests(SimpleTestCase):
    def test_divides_by_threshold(self):
        self.assertEqual(normalize_raw({'eta_a': 4.0, 'c_a': 1.0}, 2.0), {'eta_a': 2.0, 'c_a': 0.5})

    def test_threshold_must_be_positive(self):
        with self.assertRaises(ValidationError):
            normalize_raw({'eta_a': 1.0}, 0.0)


class MiscTests(SimpleTestCase):
    def test_money_defaults_to_zero(self):
        self.assertEqual(MoneyState(), MoneyState(0.0, 0.0))

    def test_guard_event_description(self):
        self.assertEqual(GuardEvent(2.0, 'eta_a', 'upward').description, 'eta_a crosses 1 upward')
        self.assertEqual(GuardEvent(1.0, 'eta_b', 'downward', 'depletion').description, 'eta_b crosses 0 downward')

    def test_infeasible_production_carries_bound(self):
        exc = InfeasibleProductionError('too much', production=-1.0, bound=2.0)
        self.assertIsInstance(exc, TradeflowError)
        self.assertIsInstance(exc, ValueError)
        self.assertEqual((exc.production, exc.bound), (-1.0, 2.0))
