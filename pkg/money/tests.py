import numpy as np
from django.core.exceptions import ValidationError
from django.test import SimpleTestCase

from core.exceptions import InfeasibleProductionError
from core.models import GoodEconomy, NormalizedState, PriceSet, TwoGoodScenario
from integrator.models import SolverOptions
from integrator.runge_kutta import integrate_with_events
from steady.fixed_points import fixed_point_economy, fixed_point_production

from .rates import (
    balanced_sigma2, exchange_product, feasibility_at_k, feasibility_check, implied_productions, k_constraints,
    margins, one_good_money_rates, pre_elimination_rates, ratio_form_holds, trade_balances, two_good_money_rates,
)


def consumption(c_a, c_b):
    return GoodEconomy(p_a=0.0, p_b=0.0, c_a=c_a, c_b=c_b, sigma=0.0)


REFERENCE = TwoGoodScenario(
    good1=consumption(1.0, 7.0),
    good2=consumption(5.0, 2.0),
    prices1=PriceSet(x_a=1.0, x_b=3.0, y=2.0),
    prices2=PriceSet(x_a=5.0, x_b=2.0, y=4.0),
    eta_a1=2.5,
    eta_b2=2.0,
)


def random_two_good(rng):
    x_a1, y1, x_b1 = np.sort(rng.uniform(0.1, 10.0, size=3))
    x_b2, y2, x_a2 = np.sort(rng.uniform(0.1, 10.0, size=3))
    c_a1, c_b1, c_a2, c_b2 = (float(v) for v in rng.uniform(0.0, 10.0, size=4))
    return TwoGoodScenario(
        good1=consumption(c_a1, c_b1),
        good2=consumption(c_a2, c_b2),
        prices1=PriceSet(x_a=float(x_a1), x_b=float(x_b1), y=float(y1)),
        prices2=PriceSet(x_a=float(x_a2), x_b=float(x_b2), y=float(y2)),
        eta_a1=float(rng.uniform(1.01, 10.0)),
        eta_b2=float(rng.uniform(1.01, 10.0)),
    )


class OneGoodMoneyTests(SimpleTestCase):
    prices = PriceSet(x_a=1.0, x_b=3.0, y=2.0)
    econ = GoodEconomy(p_a=0.0, p_b=0.0, c_a=1.0, c_b=2.0, sigma=1.0)

    def test_b_breaks_even_only_without_production(self):
        dm_a, dm_b = one_good_money_rates(self.econ, self.prices, 3.0)
        self.assertEqual(dm_b, 0.0)
        self.assertEqual(dm_a, (2.0 - 1.0) * (1.0 + 2.0))

    def test_b_loses_money_while_producing(self):
        dm_a, dm_b = one_good_money_rates(self.econ, self.prices, 2.0)
        self.assertEqual(dm_b, (2.0 - 3.0) * 1.0)
        self.assertLess(dm_b, 0.0)

    def test_zero_margin(self):
        dm_a, _ = one_good_money_rates(self.econ, PriceSet(x_a=2.0, x_b=3.0, y=2.0 + 1e-9), 2.0)
        self.assertAlmostEqual(dm_a, 0.0, delta=1e-8)

    def test_infeasible_production(self):
        with self.assertRaises(InfeasibleProductionError):
            one_good_money_rates(self.econ, self.prices, 4.0)

    def test_prices_must_favour_a(self):
        with self.assertRaises(ValidationError):
            one_good_money_rates(self.econ, PriceSet(x_a=3.0, x_b=1.0, y=2.0), 2.0)

    def test_b_profits_only_when_it_stops_producing(self):
        rng = np.random.default_rng(4)
        hits = 0
        for trial in range(5000):
            c_a, c_b = (float(v) for v in rng.uniform(0.0, 5.0, size=2))
            sigma = float(rng.uniform(0.01, 5.0))
            x_a, y, x_b = (float(v) for v in np.sort(rng.uniform(0.0, 10.0, size=3)))
            if not x_a < y < x_b:
                continue
            if trial % 5 == 0:
                # Exactly at the stop-production point.
                c_b, sigma = float(rng.integers(0, 6)), 1.0
                eta_star = 1.0 + c_b if c_b > 0 else 1.5
            else:
                eta_star = float(rng.uniform(1.0001, 1.0 + 1.2 * c_b / sigma + 0.01))
            econ = GoodEconomy(p_a=0.0, p_b=0.0, c_a=c_a, c_b=c_b, sigma=sigma)
            try:
                _, p_b = fixed_point_production(eta_star, c_a, c_b, sigma)
            except InfeasibleProductionError:
                continue
            _, dm_b = one_good_money_rates(econ, PriceSet(x_a=x_a, x_b=x_b, y=y), eta_star)
            if dm_b >= 0:
                self.assertLessEqual(p_b, 1e-12)
                hits += 1
            if p_b == 0.0:
                self.assertEqual(dm_b, 0.0)
        self.assertGreater(hits, 0)


class MarginTests(SimpleTestCase):
    def test_reference_margins(self):
        coeff = margins(REFERENCE)
        self.assertEqual((coeff.alpha1, coeff.alpha2, coeff.beta1, coeff.beta2), (1.0, -1.0, -1.0, 2.0))

    def test_symmetric_prices(self):
        s = TwoGoodScenario(
            good1=REFERENCE.good1, good2=REFERENCE.good2,
            prices1=PriceSet(x_a=1.0, x_b=3.0, y=2.0),
            prices2=PriceSet(x_a=3.0, x_b=1.0, y=2.0),
            eta_a1=2.0,
        )
        coeff = margins(s)
        self.assertEqual(coeff.alpha1, coeff.beta2)
        self.assertEqual(coeff.alpha2, coeff.beta1)

    def test_sign_pattern(self):
        rng = np.random.default_rng(5)
        for _ in range(200):
            coeff = margins(random_two_good(rng))
            self.assertGreater(coeff.alpha1, 0)
            self.assertLess(coeff.alpha2, 0)
            self.assertLess(coeff.beta1, 0)
            self.assertGreater(coeff.beta2, 0)


class TradeBalanceTests(SimpleTestCase):
    def test_balanced_sigma2(self):
        self.assertEqual(balanced_sigma2(2.0, 2.5, 2.0, 2.0, 4.0), 1.5)
        self.assertEqual(balanced_sigma2(1.7, 3.0, 3.0, 2.0, 2.0), 1.7)
        self.assertEqual(balanced_sigma2(0.0, 3.0, 2.0, 2.0, 4.0), 0.0)

    def test_balanced_sigma2_needs_excess(self):
        with self.assertRaises(ValidationError) as ctx:
            balanced_sigma2(1.0, 2.0, 1.0, 2.0, 4.0)
        self.assertIn('eta_b2', ctx.exception.message_dict)

    def test_worked_balance(self):
        balances = trade_balances(REFERENCE, 2.0, 1.5)
        self.assertEqual(balances.b_a1, 6.0)
        self.assertEqual(balances.total_a, 0.0)
        self.assertEqual(balances.total_b, 0.0)

    def test_no_trade(self):
        balances = trade_balances(REFERENCE, 0.0, 0.0)
        self.assertEqual((balances.b_a1, balances.b_a2, balances.b_b1, balances.b_b2), (0.0, -0.0, -0.0, 0.0))

    def test_balance_identity(self):
        rng = np.random.default_rng(6)
        for _ in range(1000):
            s = random_two_good(rng)
            sigma1 = float(rng.uniform(0.0, 10.0))
            sigma2 = balanced_sigma2(sigma1, s.eta_a1, s.eta_b2, s.prices1.y, s.prices2.y)
            balances = trade_balances(s, sigma1, sigma2)
            self.assertLessEqual(abs(balances.total_a), 1e-12 * max(abs(balances.b_a1), 1.0))
            self.assertLessEqual(abs(balances.total_b), 1e-12 * max(abs(balances.b_b1), 1.0))

    def test_reference_productions(self):
        p_a1, p_a2, p_b1, p_b2 = implied_productions(REFERENCE, 2.0, 1.5)
        self.assertEqual((p_a1, p_a2, p_b1, p_b2), (4.0, 3.5, 4.0, 3.5))


class TwoGoodMoneyTests(SimpleTestCase):
    def test_reference_at_k3(self):
        rates = two_good_money_rates(REFERENCE, 2.0)
        self.assertEqual((rates.dm_a, rates.dm_b), (0.5, 3.0))
        self.assertEqual(rates.productions, (4.0, 3.5, 4.0, 3.5))

    def test_autarky_loses_money_for_a(self):
        self.assertEqual(two_good_money_rates(REFERENCE, 0.0).dm_a, -4.0)

    def test_invalid_scenario_rejected(self):
        with self.assertRaises(ValidationError):
            two_good_money_rates(REFERENCE.with_eta_a1(1.0), 2.0)

    def test_single_margin_limit(self):
        # alpha2 = 0 sits outside validation; the k-form still applies.
        s = TwoGoodScenario(
            good1=REFERENCE.good1, good2=REFERENCE.good2, prices1=REFERENCE.prices1,
            prices2=PriceSet(x_a=4.0, x_b=2.0, y=4.0), eta_a1=2.5,
        )
        for k in (0.0, 1.0, 3.0, 6.0):
            result = feasibility_at_k(s, k)
            self.assertEqual(result.dm_a, margins(s).alpha1 * result.p_a1)
            self.assertGreaterEqual(result.dm_a, 0.0)


class FeasibilityTests(SimpleTestCase):
    def test_infeasible_below_interval(self):
        result = feasibility_check(REFERENCE, 1.0, 2.0)
        self.assertEqual(result.k, 1.0)
        self.assertEqual(result.dm_a, -2.5)
        self.assertFalse(result.money_a_ok)
        self.assertFalse(result.feasible)

    def test_feasible_inside_interval(self):
        result = feasibility_check(REFERENCE, 2.0)
        self.assertEqual((result.dm_a, result.dm_b, result.p_a2, result.p_b1), (0.5, 3.0, 3.5, 4.0))
        self.assertTrue(result.feasible)

    def test_no_exchange_limit(self):
        result = feasibility_check(REFERENCE, 0.0, 7.3)
        self.assertTrue(result.prod_a2_ok and result.prod_b1_ok)
        self.assertEqual(result.dm_a, margins(REFERENCE).alpha1 * 1.0 + margins(REFERENCE).alpha2 * 5.0)
        self.assertEqual(result.dm_b, margins(REFERENCE).beta1 * 7.0 + margins(REFERENCE).beta2 * 2.0)

    def test_negative_sigma_rejected(self):
        with self.assertRaises(ValidationError):
            feasibility_check(REFERENCE, -1.0)

    def test_product_collapse(self):
        rng = np.random.default_rng(8)
        for _ in range(1000):
            # Dyadic values keep sigma1 (eta_a1 - 1) exact under doubling and halving.
            sigma1 = int(rng.integers(1, 640)) / 64.0
            excess = int(rng.integers(1, 576)) / 64.0
            k = exchange_product(sigma1, 1.0 + excess)
            twin = feasibility_check(REFERENCE, 2.0 * sigma1, 1.0 + excess / 2.0)
            self.assertEqual(feasibility_check(REFERENCE, sigma1, 1.0 + excess), twin)
            self.assertEqual(feasibility_at_k(REFERENCE, k), twin)

    def test_eliminated_form_matches_pre_elimination(self):
        rng = np.random.default_rng(9)
        for _ in range(1000):
            s = random_two_good(rng)
            sigma1 = float(rng.uniform(0.0, 10.0))
            sigma2 = balanced_sigma2(sigma1, s.eta_a1, s.eta_b2, s.prices1.y, s.prices2.y)
            direct = pre_elimination_rates(s, sigma1, sigma2)
            eliminated = feasibility_check(s, sigma1)
            scale = 1e-9 * (1.0 + abs(direct.dm_a) + abs(direct.dm_b))
            self.assertAlmostEqual(eliminated.dm_a, direct.dm_a, delta=scale * 100)
            self.assertAlmostEqual(eliminated.dm_b, direct.dm_b, delta=scale * 100)
            for value, ok in (
                (direct.dm_a, eliminated.money_a_ok), (direct.dm_b, eliminated.money_b_ok),
                (direct.p_a2, eliminated.prod_a2_ok), (direct.p_b1, eliminated.prod_b1_ok),
            ):
                if abs(value) > scale * 100:
                    self.assertEqual(value >= 0, ok)

    def test_ratio_form_where_denominators_positive(self):
        rng = np.random.default_rng(10)
        checked = 0
        for _ in range(1000):
            s = random_two_good(rng)
            sigma1 = float(rng.uniform(0.0, 10.0))
            held = ratio_form_holds(s, sigma1)
            result = feasibility_check(s, sigma1)
            if result.p_a1 <= 0 or result.p_b2 <= 0:
                self.assertIsNone(held)
                continue
            if min(abs(result.dm_a), abs(result.dm_b)) < 1e-9:
                continue
            self.assertEqual(held, (result.money_a_ok, result.money_b_ok))
            checked += 1
        self.assertGreater(checked, 0)

    def test_k_constraints_reference(self):
        constraints = {c.name: (c.intercept, c.slope) for c in k_constraints(REFERENCE)}
        self.assertEqual(constraints, {
            'dm_a': (-4.0, 1.5), 'dm_b': (-3.0, 2.0), 'p_a2': (5.0, -0.5), 'p_b1': (7.0, -1.0),
        })


class MoneyDynamicsTests(SimpleTestCase):
    def test_feasible_point_never_loses_money(self):
        sigma1 = 2.0
        sigma2 = balanced_sigma2(sigma1, REFERENCE.eta_a1, REFERENCE.eta_b2, REFERENCE.prices1.y, REFERENCE.prices2.y)
        self.assertTrue(feasibility_check(REFERENCE, sigma1).feasible)

        good1 = fixed_point_economy(REFERENCE.eta_a1, REFERENCE.good1.c_a, REFERENCE.good1.c_b, sigma1)
        # Good 2 is exported by B: integrate it with the labels exchanged.
        good2 = fixed_point_economy(REFERENCE.eta_b2, REFERENCE.good2.c_b, REFERENCE.good2.c_a, sigma2)
        opts = SolverOptions(horizon=5.0, step=1e-2)
        first = integrate_with_events(NormalizedState(REFERENCE.eta_a1, 1.0), good1, REFERENCE.prices1, opts)
        second = integrate_with_events(NormalizedState(REFERENCE.eta_b2, 1.0), good2, REFERENCE.prices2.swapped(), opts)

        m_a = first.money[:, 0] + second.money[:, 1]
        m_b = first.money[:, 1] + second.money[:, 0]
        self.assertTrue(np.all(np.diff(m_a) >= -1e-12))
        self.assertTrue(np.all(np.diff(m_b) >= -1e-12))
        self.assertAlmostEqual(m_a[-1], 0.5 * 5.0, delta=1e-9)
        self.assertAlmostEqual(m_b[-1], 3.0 * 5.0, delta=1e-9)
