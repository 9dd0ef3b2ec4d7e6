import logging

import numpy as np
from django.conf import settings
from django.core.exceptions import ValidationError
from django.core.management.base import CommandError

from analytic.solutions import simulate_analytic
from cli.commands import EXIT_DEPLETION, EXIT_NUMERIC, ScenarioCommand
from cli.writers import (
    analytic_frame, analytic_times, comparison_frame, numeric_frame, series_plot_script, sibling, write_plot,
    write_table,
)
from core.exceptions import TradeflowError
from integrator.runge_kutta import integrate_with_events

logger = logging.getLogger(__name__)


class Command(ScenarioCommand):
    help = 'Simulate a one-good scenario with the closed forms, the integrator, or both.'

    def add_arguments(self, parser):
        super().add_arguments(parser)
        mode = parser.add_mutually_exclusive_group()
        mode.add_argument('--analytic', dest='mode', action='store_const', const='analytic',
                          help='Piecewise closed-form solution only')
        mode.add_argument('--numeric', dest='mode', action='store_const', const='numeric',
                          help='RK4 integration with event detection only')
        mode.add_argument('--both', dest='mode', action='store_const', const='both',
                          help='Both, plus a comparison table (default)')
        parser.set_defaults(mode='both')
        parser.add_argument('--out', default=None, help='Time-series CSV path (default: stdout)')
        parser.add_argument('--plot', action='store_true', help='Write a gnuplot script next to --out')

    def handle(self, *args, **options):
        scenario = self.load(options['scenario'])
        mode, out = options['mode'], options['out']
        if not scenario.is_one_good:
            self.fail_input('simulate needs a one-good scenario')
        if scenario.econ is None:
            self.fail_input('simulate needs productions: p_a and p_b or eta_star in [good1]')
        if scenario.initial is None:
            self.fail_input('simulate needs an [initial] section')
        if scenario.solver is None:
            self.fail_input('simulate needs a [solver] section')
        if options['plot'] and out is None:
            self.fail_input('--plot needs --out')

        opts = scenario.solver
        logger.info('simulate %s (%s) to t=%s', options['scenario'], mode, opts.horizon)
        trajectory = series = None
        try:
            if mode in ('analytic', 'both'):
                trajectory = simulate_analytic(scenario.initial, scenario.econ, opts.horizon, opts.event_tol)
            if mode in ('numeric', 'both'):
                series = integrate_with_events(scenario.initial, scenario.econ, scenario.prices, opts, scenario.money0)
        except ValidationError as exc:
            self.fail_invalid(exc)
        except TradeflowError as exc:
            raise CommandError(f'numerical failure: {exc}', returncode=EXIT_NUMERIC)

        if trajectory is not None:
            self.report_segments(trajectory)
        if series is not None:
            frame = numeric_frame(series)
        else:
            frame = analytic_frame(trajectory, analytic_times(trajectory, opts.step))
        written = self.emit(frame, out)
        if written is not None and options['plot']:
            write_plot(series_plot_script(written, f'{options["scenario"]} ({mode})'), written)

        exceeded = False
        if mode == 'both':
            exceeded = self.compare(trajectory, series, opts, out)
        if series is not None:
            for event in series.events:
                self.stdout.write(f'event t={event.time!r}: {event.description}')

        if exceeded:
            raise CommandError('analytic and numeric solutions disagree', returncode=EXIT_NUMERIC)
        if series is not None and series.halted:
            depletion = next(event for event in reversed(series.events) if event.kind == 'depletion')
            raise CommandError(
                f'integration halted: {depletion.component} depleted at t={depletion.time!r}',
                returncode=EXIT_DEPLETION,
            )
        self.stdout.write(self.style.SUCCESS('simulation complete'))

    def report_segments(self, trajectory):
        for segment in trajectory.segments:
            self.stdout.write(f'segment {segment.regime.value} [{segment.t_start!r}, {segment.t_end!r}]')

    def compare(self, trajectory, series, opts, out):
        """Sup-norm check of the closed forms against the integrator; True when over the limit."""
        times = series.times
        numeric = series.stocks
        # Depletion policies change the dynamics; compare only up to the first depletion.
        depletions = [event.time for event in series.events if event.kind == 'depletion']
        if depletions:
            keep = times <= depletions[0]
            times, numeric = times[keep], numeric[keep]

        frame = comparison_frame(times, trajectory.sample(times), numeric)
        worst = float(np.max(frame['discrepancy'])) if len(frame) else 0.0
        if out is not None:
            write_table(frame, sibling(out, '.comparison.csv'))
            write_table(analytic_frame(trajectory, analytic_times(trajectory, opts.step)), sibling(out, '.analytic.csv'))

        limit = settings.TRADEFLOW_DISCREPANCY_LIMIT
        self.stdout.write(f'sup-norm discrepancy: {worst!r}')
        if worst > limit:
            logger.warning('discrepancy %.3g exceeds %.3g', worst, limit)
            self.stdout.write(self.style.ERROR(f'discrepancy {worst!r} exceeds {limit!r}'))
            return True
        return False
