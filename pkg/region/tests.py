import math
import time

import numpy as np
from django.core.exceptions import ValidationError
from django.test import SimpleTestCase
from pandas.testing import assert_frame_equal

from core.models import GoodEconomy, PriceSet, TwoGoodScenario
from money.rates import balanced_sigma2, pre_elimination_rates

from .models import REGION_COLUMNS, GridSpec, KInterval
from .scanner import disagreements, feasible_k_interval, scan_region


def consumption(c_a, c_b):
    return GoodEconomy(p_a=0.0, p_b=0.0, c_a=c_a, c_b=c_b, sigma=0.0)


def scenario(c_a1=1.0, c_b1=7.0, c_a2=5.0, c_b2=2.0):
    return TwoGoodScenario(
        good1=consumption(c_a1, c_b1),
        good2=consumption(c_a2, c_b2),
        prices1=PriceSet(x_a=1.0, x_b=3.0, y=2.0),
        prices2=PriceSet(x_a=5.0, x_b=2.0, y=4.0),
        eta_a1=2.0,
    )


REFERENCE = scenario()
REFERENCE_GRID = GridSpec(
    sigma1_min=0.5, sigma1_max=10.0, sigma1_steps=200,
    eta_min=1.5, eta_max=10.0, eta_steps=200,
)


class GridSpecTests(SimpleTestCase):
    def test_nodes(self):
        grid = GridSpec(0.0, 1.0, 3, 1.0, 2.0, 2)
        self.assertEqual(grid.sigma1_values(), [0.0, 0.5, 1.0])
        self.assertEqual(grid.eta_values(), [1.0, 2.0])

    def test_invalid_grid(self):
        with self.assertRaises(ValidationError) as ctx:
            GridSpec(2.0, 1.0, 1, 0.5, 3.0, 5)
        self.assertEqual(set(ctx.exception.message_dict), {'sigma1_max', 'sigma1_steps', 'eta_min'})

    def test_non_finite_bounds_rejected(self):
        with self.assertRaises(ValidationError) as ctx:
            GridSpec(0.0, math.inf, 3, math.nan, 2.0, 2)
        self.assertEqual(set(ctx.exception.message_dict), {'sigma1_max', 'eta_min'})


class KIntervalTests(SimpleTestCase):
    def test_reference_interval(self):
        interval = feasible_k_interval(REFERENCE)
        self.assertEqual(interval, KInterval(8.0 / 3.0, 7.0))
        self.assertEqual(str(interval), '[2.6666666666666665, 7.0]')
        self.assertTrue(interval.contains(3.0))
        self.assertFalse(interval.contains(1.0))

    def test_empty_when_b_consumes_little(self):
        interval = feasible_k_interval(scenario(c_b1=1.0))
        self.assertTrue(interval.empty)
        self.assertEqual(str(interval), 'empty')
        self.assertFalse(interval.contains(1.0))

    def test_b_consuming_nothing_allows_only_autarky(self):
        interval = feasible_k_interval(scenario(c_b1=0.0, c_a2=0.5))
        self.assertEqual(interval, KInterval(0.0, 0.0))
        self.assertTrue(interval.contains(0.0))

    def test_unbounded_above(self):
        interval = KInterval(1.0, math.inf)
        self.assertTrue(interval.contains(1e300))
        self.assertFalse(interval.contains(0.5))
        self.assertEqual(str(interval), '[1.0, inf]')


class ScanRegionTests(SimpleTestCase):
    def test_reference_grid_matches_interval(self):
        started = time.perf_counter()
        scan = scan_region(REFERENCE, REFERENCE_GRID)
        interval = feasible_k_interval(REFERENCE)
        self.assertEqual(disagreements(scan, interval), [])
        self.assertLess(time.perf_counter() - started, 5.0)
        self.assertGreater(scan.feasible_count, 0)
        self.assertLess(scan.feasible_count, 200 * 200)

    def test_matches_explicit_sigma2(self):
        grid = GridSpec(0.5, 10.0, 40, 1.5, 10.0, 40)
        scan = scan_region(REFERENCE, grid)
        checked = 0
        for _, _, sigma1, eta, result in scan.nodes():
            s = REFERENCE.with_eta_a1(eta)
            sigma2 = balanced_sigma2(sigma1, eta, s.eta_b2, s.prices1.y, s.prices2.y)
            direct = pre_elimination_rates(s, sigma1, sigma2)
            values = (direct.dm_a, direct.dm_b, direct.p_a2, direct.p_b1)
            if min(abs(v) for v in values) < 1e-9:
                continue
            self.assertEqual(all(v >= 0 for v in values), result.feasible)
            checked += 1
        self.assertGreater(checked, 1000)

    def test_feasible_nodes_contiguous_per_row(self):
        mask = scan_region(REFERENCE, REFERENCE_GRID).feasible_mask()
        for row in mask:
            columns = np.flatnonzero(row)
            if len(columns):
                self.assertEqual(columns[-1] - columns[0] + 1, len(columns))

    def test_empty_region(self):
        grid = GridSpec(0.5, 1.0, 10, 1.5, 2.0, 10)
        scan = scan_region(REFERENCE, grid)
        self.assertEqual(scan.feasible_count, 0)
        self.assertEqual(disagreements(scan, feasible_k_interval(REFERENCE)), [])

    def test_autarky_column(self):
        s = scenario(c_b1=0.0, c_a2=0.5)
        scan = scan_region(s, GridSpec(0.0, 1.0, 3, 1.5, 2.0, 2))
        self.assertEqual(scan.feasible_mask().tolist(), [[True, False, False], [True, False, False]])

    def test_frame_layout(self):
        frame = scan_region(REFERENCE, GridSpec(1.0, 2.0, 2, 2.0, 4.0, 2)).to_frame()
        self.assertEqual(list(frame.columns), REGION_COLUMNS)
        self.assertEqual(len(frame), 4)
        self.assertEqual(list(frame['sigma1']), [1.0, 2.0, 1.0, 2.0])
        self.assertEqual(list(frame['eta_a1']), [2.0, 2.0, 4.0, 4.0])
        self.assertEqual(list(frame['k']), [1.0, 2.0, 3.0, 6.0])
        self.assertEqual(list(frame['feasible']), [False, False, True, True])

    def test_worker_count_does_not_change_result(self):
        grid = GridSpec(0.5, 10.0, 50, 1.5, 10.0, 60)
        single = scan_region(REFERENCE, grid, workers=1)
        pooled = scan_region(REFERENCE, grid, workers=4)
        self.assertEqual(single.results, pooled.results)
        assert_frame_equal(single.to_frame(), pooled.to_frame())


class DisagreementTests(SimpleTestCase):
    def test_endpoint_node_is_feasible(self):
        # k = 7 exactly at sigma1 = 7, eta = 2.
        scan = scan_region(REFERENCE, GridSpec(6.0, 7.0, 2, 1.5, 2.0, 2))
        self.assertEqual(disagreements(scan, feasible_k_interval(REFERENCE)), [])
        self.assertEqual(scan.results[1][1].p_b1, 0.0)
        self.assertTrue(scan.results[1][1].feasible)

    def test_nodes_on_the_lower_endpoint_agree(self):
        scan = scan_region(REFERENCE, GridSpec(0.0, 8.0, 193, 1.0, 3.0, 97))
        interval = feasible_k_interval(REFERENCE)
        self.assertEqual(disagreements(scan, interval), [])
        on_endpoint = [result for _, _, _, _, result in scan.nodes() if result.k == interval.lower]
        self.assertTrue(on_endpoint)
        for result in on_endpoint:
            self.assertEqual(result.feasible, interval.contains(result.k))

    def test_wrong_interval_is_reported(self):
        scan = scan_region(REFERENCE, GridSpec(1.0, 2.0, 2, 2.0, 4.0, 2))
        self.assertEqual(disagreements(scan, KInterval(0.0, 1.5)), [(0, 0), (1, 0), (1, 1)])
