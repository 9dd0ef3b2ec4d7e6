import re
import tempfile
from io import StringIO
from pathlib import Path

import numpy as np
import pandas as pd
from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase

from core.models import DepletionPolicy, GoodEconomy, MoneyState, NormalizedState, PriceSet, TwoGoodScenario
from integrator.models import SolverOptions
from region.models import GridSpec
from steady.fixed_points import fixed_point_economy

from .commands import EXIT_DEPLETION, EXIT_INPUT
from .scenario import Scenario, ScenarioError, load_scenario, parse_scenario, serialize_scenario
from .writers import COMPARISON_COLUMNS, SERIES_COLUMNS, sibling

SCENARIOS = Path(__file__).resolve().parent / 'scenarios'
FIG2 = SCENARIOS / 'fig2.scenario'
COOPERATION = SCENARIOS / 'cooperation.scenario'
CROSSING = SCENARIOS / 'crossing.scenario'

DRAINING = """
[model]
kind = one-good

[good1]
p_a = 1.0
p_b = 0.0
c_a = 1.0
c_b = 1.0
sigma = 1.0

[initial]
eta_a = 0.5
eta_b = 0.2

[solver]
horizon = 1.0
step = 0.01
"""

STILL = """
[model]
kind = one-good

[good1]
p_a = 1.0
p_b = 1.0
c_a = 1.0
c_b = 1.0
sigma = 0.0

[initial]
eta_a = 0.5
eta_b = 1.5

[solver]
horizon = 1.0
step = 0.25
"""

CONSUMPTION_ONLY = """
[model]
kind = one-good

[good1]
c_a = 1.0
c_b = 2.0
sigma = 1.0

[prices1]
x_a = 1.0
x_b = 3.0
y = 2.0
"""


def uniform(rng, low, high):
    return float(rng.uniform(low, high))


def random_solver(rng):
    return SolverOptions(
        horizon=uniform(rng, 1.0, 50.0),
        step=uniform(rng, 1e-4, 0.5),
        event_tol=uniform(rng, 1e-13, 1e-8),
        depletion_policy=list(DepletionPolicy)[int(rng.integers(len(DepletionPolicy)))],
    )


def random_one_good(rng):
    c_a, c_b = uniform(rng, 0.0, 10.0), uniform(rng, 0.1, 10.0)
    sigma = uniform(rng, 0.1, 3.0)
    consumption = GoodEconomy(p_a=0.0, p_b=0.0, c_a=c_a, c_b=c_b, sigma=sigma)
    fields = {'kind': 'one-good', 'consumption': consumption}
    variant = int(rng.integers(3))
    if variant == 0:
        fields['econ'] = GoodEconomy(
            p_a=uniform(rng, 0.0, 5.0), p_b=uniform(rng, 0.0, 5.0), c_a=c_a, c_b=c_b, sigma=sigma,
        )
    elif variant == 1:
        eta_star = 1.0 + uniform(rng, 0.01, 0.99) * c_b / sigma
        fields['eta_star'] = eta_star
        fields['econ'] = fixed_point_economy(eta_star, c_a, c_b, sigma)
    if rng.random() < 0.7:
        fields['prices'] = PriceSet(*(uniform(rng, 0.0, 10.0) for _ in range(3)))
    if rng.random() < 0.7:
        fields['initial'] = NormalizedState(uniform(rng, -1.0, 3.0), uniform(rng, -1.0, 3.0))
        fields['money0'] = MoneyState(uniform(rng, -5.0, 5.0), uniform(rng, -5.0, 5.0))
    if rng.random() < 0.7:
        fields['solver'] = random_solver(rng)
    return Scenario(**fields)


def random_two_good(rng):
    x_a1, y1, x_b1 = sorted(uniform(rng, 0.1, 10.0) for _ in range(3))
    x_b2, y2, x_a2 = sorted(uniform(rng, 0.1, 10.0) for _ in range(3))
    goods = [
        GoodEconomy(*(uniform(rng, 0.0, 5.0) for _ in range(5)))
        for _ in range(2)
    ]
    sigma1_min, eta_min = uniform(rng, 0.0, 2.0), uniform(rng, 1.0, 2.0)
    grid = GridSpec(
        sigma1_min, sigma1_min + uniform(rng, 0.1, 10.0), int(rng.integers(2, 300)),
        eta_min, eta_min + uniform(rng, 0.1, 10.0), int(rng.integers(2, 300)),
    )
    return Scenario(
        kind='two-good',
        two_good=TwoGoodScenario(
            good1=goods[0], good2=goods[1],
            prices1=PriceSet(x_a=x_a1, x_b=x_b1, y=y1),
            prices2=PriceSet(x_a=x_a2, x_b=x_b2, y=y2),
            eta_a1=uniform(rng, 1.01, 10.0),
            eta_b2=uniform(rng, 1.01, 10.0),
        ),
        grid=grid if rng.random() < 0.8 else None,
        solver=random_solver(rng) if rng.random() < 0.3 else None,
    )



def two_good_text(prices1='x_a = 1.0\nx_b = 3.0\ny = 2.0', grid='0.5, 10.0, 200, 1.5, 10.0, 200', extra=''):
    s_min, s_max, s_steps, e_min, e_max, e_steps = (part.strip() for part in grid.split(','))
    return (
        '[model]\nkind = two-good\n\n'
        '[good1]\nc_a = 1.0\nc_b = 7.0\neta_star = 2.0\n\n'
        f'[prices1]\n{prices1}\n\n'
        '[good2]\nc_a = 5.0\nc_b = 2.0\n\n'
        '[prices2]\nx_a = 5.0\nx_b = 2.0\ny = 4.0\n\n'
        f'[grid]\nsigma1_min = {s_min}\nsigma1_max = {s_max}\nsigma1_steps = {s_steps}\n'
        f'eta_min = {e_min}\neta_max = {e_max}\neta_steps = {e_steps}\n'
        f'{extra}'
    )


class ScenarioParsingTests(SimpleTestCase):
    def test_fig2(self):
        scenario = parse_scenario(FIG2)
        self.assertFalse(scenario.is_one_good)
        self.assertEqual(scenario.two_good, TwoGoodScenario(
            good1=GoodEconomy(p_a=0.0, p_b=0.0, c_a=1.0, c_b=7.0, sigma=0.0),
            good2=GoodEconomy(p_a=0.0, p_b=0.0, c_a=5.0, c_b=2.0, sigma=0.0),
            prices1=PriceSet(x_a=1.0, x_b=3.0, y=2.0),
            prices2=PriceSet(x_a=5.0, x_b=2.0, y=4.0),
            eta_a1=2.0,
            eta_b2=2.0,
        ))
        self.assertEqual(scenario.grid, GridSpec(0.5, 10.0, 200, 1.5, 10.0, 200))
        self.assertIsNone(scenario.solver)

    def test_cooperation_computes_productions(self):
        scenario = parse_scenario(COOPERATION)
        self.assertTrue(scenario.is_one_good)
        self.assertEqual(scenario.econ, GoodEconomy(p_a=1.5, p_b=1.5, c_a=1.0, c_b=2.0, sigma=1.0))
        self.assertEqual(scenario.eta_star, 1.5)
        self.assertEqual(scenario.initial, NormalizedState(1.5, 1.0))
        self.assertEqual(scenario.money0, MoneyState())
        self.assertEqual(scenario.solver, SolverOptions(horizon=100.0, step=0.01))

    def test_eta_b2_defaults(self):
        self.assertEqual(load_scenario(two_good_text()).two_good.eta_b2, 2.0)

    def test_raw_values_normalized_by_h0(self):
        scenario = load_scenario(
            '[model]\nkind = one-good\nh0 = 2.0\n\n'
            '[good1]\nc_a = 2.0\nc_b = 4.0\nsigma = 2.0\neta_star = 3.0\n\n'
            '[initial]\neta_a = 3.0\neta_b = 2.0\nm_a = 7.0\n'
        )
        self.assertEqual(scenario.econ, GoodEconomy(p_a=1.5, p_b=1.5, c_a=1.0, c_b=2.0, sigma=1.0))
        self.assertEqual(scenario.initial, NormalizedState(1.5, 1.0))
        self.assertEqual(scenario.money0, MoneyState(7.0, 0.0))

    def test_price_at_cost_rejected(self):
        with self.assertRaises(ScenarioError) as ctx:
            load_scenario(two_good_text(prices1='x_a = 2.0\nx_b = 3.0\ny = 2.0'), path='bad.scenario')
        self.assertIn('prices1', ctx.exception.errors)
        self.assertTrue(ctx.exception.messages()[0].startswith('bad.scenario: [prices1] prices1: x_a < y required'))

    def test_empty_file(self):
        with self.assertRaises(ScenarioError) as ctx:
            load_scenario('', path='empty.scenario')
        self.assertEqual(ctx.exception.messages(), ['empty.scenario: [model] missing [model]'])

    def test_unknown_key_and_section(self):
        with self.assertRaises(ScenarioError) as ctx:
            load_scenario(two_good_text(extra='\n[extra]\na = 1\n').replace('c_b = 7.0', 'c_b = 7.0\nspeed = 3'))
        messages = ctx.exception.messages()
        self.assertIn('<string>: [good1] speed: Unknown key.', messages)
        self.assertIn('<string>: [extra] Unknown section.', messages)

    def test_errors_reported_together(self):
        text = two_good_text(grid='0.5, 10.0, 1, 1.5, 10.0, 200').replace('c_a = 5.0', 'c_a = -5.0')
        with self.assertRaises(ScenarioError) as ctx:
            load_scenario(text)
        self.assertEqual(set(ctx.exception.errors), {'good2', 'grid'})

    def test_one_good_needs_sigma(self):
        with self.assertRaises(ScenarioError) as ctx:
            load_scenario(DRAINING.replace('sigma = 1.0\n', ''))
        self.assertIn('good1', ctx.exception.errors)

    def test_consumption_only_one_good(self):
        scenario = load_scenario(CONSUMPTION_ONLY)
        self.assertIsNone(scenario.econ)
        self.assertIsNone(scenario.eta_star)
        self.assertEqual(scenario.consumption, GoodEconomy(p_a=0.0, p_b=0.0, c_a=1.0, c_b=2.0, sigma=1.0))
        self.assertEqual(scenario.prices, PriceSet(x_a=1.0, x_b=3.0, y=2.0))

    def test_half_given_productions_rejected(self):
        with self.assertRaises(ScenarioError) as ctx:
            load_scenario(DRAINING.replace('p_b = 0.0\n', ''))
        self.assertIn('<string>: [good1] give both p_a and p_b', ctx.exception.messages())

    def test_non_finite_solver_rejected(self):
        with self.assertRaises(ScenarioError) as ctx:
            load_scenario(DRAINING.replace('horizon = 1.0', 'horizon = inf'))
        self.assertEqual(set(ctx.exception.errors), {'solver'})

    def test_non_finite_grid_rejected(self):
        with self.assertRaises(ScenarioError) as ctx:
            load_scenario(two_good_text(grid='0.5, inf, 200, 1.5, 10.0, 200'))
        self.assertEqual(set(ctx.exception.errors), {'grid'})

    def test_syntax_error(self):
        with self.assertRaises(ScenarioError) as ctx:
            load_scenario('c_a = 1.0\n')
        self.assertIn('syntax', ctx.exception.errors)

    def test_missing_file(self):
        with self.assertRaises(ScenarioError) as ctx:
            parse_scenario(SCENARIOS / 'absent.scenario')
        self.assertIn('file', ctx.exception.errors)


class ScenarioSerializationTests(SimpleTestCase):
    def test_bundled_scenarios_survive_rewrite(self):
        for path in (FIG2, COOPERATION, CROSSING):
            scenario = parse_scenario(path)
            self.assertEqual(load_scenario(serialize_scenario(scenario)), scenario)

    def test_generated_scenarios_survive_rewrite(self):
        rng = np.random.default_rng(17)
        for _ in range(200):
            scenario = random_one_good(rng) if rng.random() < 0.5 else random_two_good(rng)
            self.assertEqual(load_scenario(serialize_scenario(scenario)), scenario)

    def test_constructed_scenario(self):
        scenario = Scenario(
            kind='one-good',
            econ=GoodEconomy(p_a=0.1, p_b=2.0 / 3.0, c_a=0.3, c_b=1e-7, sigma=1.7),
            consumption=GoodEconomy(p_a=0.0, p_b=0.0, c_a=0.3, c_b=1e-7, sigma=1.7),
            prices=PriceSet(x_a=0.2, x_b=5.0, y=1.0 / 3.0),
            initial=NormalizedState(0.7, 1.1),
            money0=MoneyState(-2.5, 0.1),
            solver=SolverOptions(horizon=3.0, step=0.1, event_tol=1e-9,
                                 depletion_policy=DepletionPolicy.CLAMP_TO_ZERO),
        )
        self.assertEqual(load_scenario(serialize_scenario(scenario)), scenario)


class CommandTestCase(SimpleTestCase):
    def setUp(self):
        tmp = tempfile.TemporaryDirectory()
        self.addCleanup(tmp.cleanup)
        self.tmp = Path(tmp.name)

    def scenario_file(self, text, name='scenario.scenario'):
        path = self.tmp / name
        path.write_text(text)
        return path

    def run_command(self, *args):
        out = StringIO()
        call_command(*[str(arg) for arg in args], stdout=out)
        return out.getvalue()

    def command_error(self, *args):
        with self.assertRaises(CommandError) as ctx:
            self.run_command(*args)
        return ctx.exception


class SimulateCommandTests(CommandTestCase):
    def test_fixed_point_stays_put(self):
        out_path = self.tmp / 'coop.csv'
        output = self.run_command('simulate', COOPERATION, '--out', out_path)
        self.assertIn('segment a_exports [0.0, 100.0]', output)
        self.assertIn('simulation complete', output)

        series = pd.read_csv(out_path)
        self.assertEqual(list(series.columns), SERIES_COLUMNS + ['m_a', 'm_b'])
        self.assertEqual(set(series['eta_a']), {1.5})
        self.assertEqual(set(series['eta_b']), {1.0})
        self.assertEqual(set(series['regime']), {'a_exports'})

        comparison = pd.read_csv(sibling(out_path, '.comparison.csv'))
        self.assertEqual(list(comparison.columns), COMPARISON_COLUMNS)
        self.assertLessEqual(comparison['discrepancy'].max(), 1e-12)
        self.assertTrue(sibling(out_path, '.analytic.csv').exists())

    def test_threshold_crossing(self):
        out_path = self.tmp / 'crossing.csv'
        output = self.run_command('simulate', CROSSING, '--both', '--out', out_path)
        segments = [line for line in output.splitlines() if line.startswith('segment ')]
        self.assertEqual(len(segments), 2)
        first = re.fullmatch(r'segment no_exchange \[0\.0, (\S+)\]', segments[0])
        self.assertAlmostEqual(float(first.group(1)), 2.0, delta=1e-9)
        self.assertTrue(segments[1].startswith('segment a_exports'))
        event = re.search(r'event t=(\S+): eta_a crosses 1 upward', output)
        self.assertAlmostEqual(float(event.group(1)), 2.0, delta=1e-9)

        series = pd.read_csv(out_path)
        self.assertEqual(list(series.columns), SERIES_COLUMNS)
        self.assertLessEqual(float((series['t'] - 2.0).abs().min()), 1e-9)
        self.assertEqual(list(dict.fromkeys(series['regime'])), ['no_exchange', 'a_exports'])

    def test_analytic_only_to_stdout(self):
        output = self.run_command('simulate', self.scenario_file(STILL), '--analytic')
        self.assertIn('segment b_exports [0.0, 1.0]', output)
        self.assertIn('t,eta_a,eta_b,regime,f\n0,0.5,1.5,b_exports,-0.5\n', output)
        self.assertNotIn('sup-norm', output)
        self.assertIn('simulation complete', output)

    def test_depletion_halts(self):
        error = self.command_error('simulate', self.scenario_file(DRAINING), '--numeric')
        self.assertEqual(error.returncode, EXIT_DEPLETION)
        halted = re.fullmatch(r'integration halted: eta_b depleted at t=(\S+)', str(error))
        self.assertAlmostEqual(float(halted.group(1)), 0.2, delta=1e-9)

    def test_needs_one_good_scenario(self):
        error = self.command_error('simulate', FIG2)
        self.assertEqual(error.returncode, EXIT_INPUT)

    def test_needs_productions(self):
        error = self.command_error('simulate', self.scenario_file(CONSUMPTION_ONLY))
        self.assertEqual(error.returncode, EXIT_INPUT)
        self.assertIn('needs productions', str(error))

    def test_plot_needs_out(self):
        error = self.command_error('simulate', CROSSING, '--plot')
        self.assertEqual(error.returncode, EXIT_INPUT)

    def test_plot_script(self):
        out_path = self.tmp / 'still.csv'
        self.run_command('simulate', self.scenario_file(STILL), '--numeric', '--out', out_path, '--plot')
        script = (self.tmp / 'still.gp').read_text()
        self.assertIn("plot 'still.csv'", script)

    def test_repeated_runs_identical(self):
        first, second = self.tmp / 'first.csv', self.tmp / 'second.csv'
        self.run_command('simulate', CROSSING, '--out', first)
        self.run_command('simulate', CROSSING, '--out', second)
        self.assertEqual(first.read_bytes(), second.read_bytes())
        self.assertEqual(
            sibling(first, '.comparison.csv').read_bytes(), sibling(second, '.comparison.csv').read_bytes(),
        )


class FixedPointCommandTests(CommandTestCase):
    def test_b_stops_producing(self):
        output = self.run_command('fixed_point', COOPERATION, '--eta-star', '3.0')
        self.assertIn(f'{"P_A":<20}3.0', output)
        self.assertIn(f'{"P_B":<20}0.0', output)
        self.assertIn(f'{"dm_B/dt":<20}', output)
        self.assertIn('threshold met', output)

    def test_scenario_eta_star(self):
        output = self.run_command('fixed_point', COOPERATION)
        self.assertIn(f'{"P_B":<20}1.5', output)
        self.assertIn(f'{"dm_B/dt":<20}-1.5', output)
        self.assertIn('B keeps losing money', output)

    def test_consumption_only_scenario(self):
        path = self.scenario_file(CONSUMPTION_ONLY)
        output = self.run_command('fixed_point', path, '--eta-star', '3.0')
        self.assertIn(f'{"P_A":<20}3.0', output)
        self.assertIn(f'{"P_B":<20}0.0', output)
        self.assertIn('threshold met', output)

    def test_consumption_only_needs_eta_star(self):
        error = self.command_error('fixed_point', self.scenario_file(CONSUMPTION_ONLY))
        self.assertEqual(error.returncode, EXIT_INPUT)

    def test_infeasible_production(self):
        error = self.command_error('fixed_point', COOPERATION, '--eta-star', '4.0')
        self.assertEqual(error.returncode, EXIT_INPUT)
        self.assertIn('C_B = 2.0', str(error))

    def test_stock_below_threshold(self):
        error = self.command_error('fixed_point', COOPERATION, '--eta-star', '0.5')
        self.assertEqual(error.returncode, EXIT_INPUT)


class RegionCommandTests(CommandTestCase):
    def test_fig2(self):
        out_path = self.tmp / 'region.csv'
        output = self.run_command('region', FIG2, '--out', out_path)
        self.assertIn('feasible k-interval: [2.6666666666666665, 7.0]', output)
        self.assertIn('dm_a: -4.0 + 1.5 k >= 0', output)
        self.assertIn('region scan complete', output)
        frame = pd.read_csv(out_path)
        self.assertEqual(len(frame), 200 * 200)
        self.assertIn(f'feasible nodes: {int(frame["feasible"].sum())} of 40000', output)

    def test_empty_region(self):
        output = self.run_command('region', self.scenario_file(two_good_text(grid='0.5, 1.0, 5, 1.5, 2.0, 5')))
        self.assertIn('feasible nodes: 0 of 25', output)
        self.assertIn('empty region', output)

    def test_small_grid_to_stdout(self):
        output = self.run_command('region', self.scenario_file(two_good_text(grid='1.0, 2.0, 2, 2.0, 4.0, 2')))
        lines = output.splitlines()
        header = lines.index('sigma1,eta_a1,k,dm_a,dm_b,p_a2,p_b1,feasible')
        self.assertEqual(lines[header + 3], '1,4,3,0.5,3,3.5,4,True')
        self.assertEqual(lines[header + 5], 'dm_a: -4.0 + 1.5 k >= 0')

    def test_plot_script(self):
        out_path = self.tmp / 'region.csv'
        self.run_command('region', self.scenario_file(two_good_text(grid='1.0, 2.0, 2, 2.0, 4.0, 2')),
                         '--out', out_path, '--plot')
        self.assertTrue((self.tmp / 'region.gp').exists())

    def test_repeated_runs_identical(self):
        first, second = self.tmp / 'first.csv', self.tmp / 'second.csv'
        self.run_command('region', FIG2, '--out', first)
        self.run_command('region', FIG2, '--out', second)
        self.assertEqual(first.read_bytes(), second.read_bytes())

    def test_needs_two_good_scenario(self):
        error = self.command_error('region', COOPERATION)
        self.assertEqual(error.returncode, EXIT_INPUT)

    def test_unreadable_scenario(self):
        error = self.command_error('region', self.tmp / 'absent.scenario')
        self.assertEqual(error.returncode, EXIT_INPUT)
        self.assertIn('cannot read', str(error))
