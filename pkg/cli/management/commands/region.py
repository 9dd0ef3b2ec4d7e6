import logging

from django.core.exceptions import ValidationError
from django.core.management.base import CommandError

from cli.commands import EXIT_NUMERIC, ScenarioCommand
from cli.writers import region_frame, region_plot_script, write_plot
from money.rates import k_constraints
from region.scanner import disagreements, feasible_k_interval, scan_region

logger = logging.getLogger(__name__)


class Command(ScenarioCommand):
    help = 'Scan the (sigma1, eta_A1) grid of a two-good scenario for feasible trade.'

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument('--out', default=None, help='Region CSV path (default: stdout)')
        parser.add_argument('--plot', action='store_true', help='Write a gnuplot script next to --out')

    def handle(self, *args, **options):
        scenario = self.load(options['scenario'])
        out = options['out']
        if scenario.two_good is None:
            self.fail_input('region needs a two-good scenario')
        if scenario.grid is None:
            self.fail_input('region needs a [grid] section')
        if options['plot'] and out is None:
            self.fail_input('--plot needs --out')

        grid = scenario.grid
        logger.info('region scan %s: %d x %d nodes', options['scenario'], grid.eta_steps, grid.sigma1_steps)
        try:
            scan = scan_region(scenario.two_good, grid)
        except ValidationError as exc:
            self.fail_invalid(exc)
        interval = feasible_k_interval(scenario.two_good)
        mismatches = disagreements(scan, interval)

        written = self.emit(region_frame(scan), out)
        if written is not None and options['plot']:
            write_plot(region_plot_script(written, f'{options["scenario"]}: feasible nodes'), written)

        for constraint in k_constraints(scenario.two_good):
            self.stdout.write(f'{constraint.name}: {constraint.intercept!r} + {constraint.slope!r} k >= 0')
        self.stdout.write(f'feasible k-interval: {interval}')
        total = len(scan.eta_values) * len(scan.sigma1_values)
        self.stdout.write(f'feasible nodes: {scan.feasible_count} of {total}')
        if scan.feasible_count == 0:
            self.stdout.write(self.style.WARNING('empty region: no grid node satisfies all four conditions'))

        if mismatches:
            i, j = mismatches[0]
            logger.warning('%d node(s) disagree with the closed-form interval', len(mismatches))
            raise CommandError(
                f'{len(mismatches)} node(s) disagree with the closed-form interval, first at '
                f'sigma1={scan.sigma1_values[j]!r}, eta_a1={scan.eta_values[i]!r}',
                returncode=EXIT_NUMERIC,
            )
        self.stdout.write(self.style.SUCCESS('region scan complete'))
