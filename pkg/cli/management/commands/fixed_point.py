import logging

from django.core.exceptions import ValidationError

from cli.commands import ScenarioCommand
from core.exceptions import InfeasibleProductionError
from money.rates import one_good_money_rates
from steady.fixed_points import fixed_point_production

logger = logging.getLogger(__name__)


class Command(ScenarioCommand):
    help = 'Implied productions and money rates at the A-exports fixed point.'

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument('--eta-star', type=float, default=None,
                            help="Fixed-point stock of A (default: the scenario's eta_star)")

    def handle(self, *args, **options):
        scenario = self.load(options['scenario'])
        if not scenario.is_one_good:
            self.fail_input('fixed_point needs a one-good scenario')
        if scenario.prices is None:
            self.fail_input('fixed_point needs a [prices1] section')

        eta_star = options['eta_star'] if options['eta_star'] is not None else scenario.eta_star
        if eta_star is None:
            self.fail_input('give --eta-star or eta_star in [good1]')

        econ = scenario.consumption
        try:
            p_a, p_b = fixed_point_production(eta_star, econ.c_a, econ.c_b, econ.sigma)
            dm_a, dm_b = one_good_money_rates(econ, scenario.prices, eta_star)
        except InfeasibleProductionError as exc:
            self.fail_input(f'{exc} (largest admissible sigma (eta_a - 1) is C_B = {exc.bound!r})')
        except ValidationError as exc:
            self.fail_invalid(exc)

        exported = econ.sigma * (eta_star - 1.0)
        logger.info('fixed point at eta_a*=%r: P_A=%r P_B=%r', eta_star, p_a, p_b)
        rows = [
            ('eta_a*', eta_star),
            ('P_A', p_a),
            ('P_B', p_b),
            ('dm_A/dt', dm_a),
            ('dm_B/dt', dm_b),
            ('sigma (eta_a* - 1)', exported),
            ('C_B', econ.c_b),
        ]
        for name, value in rows:
            self.stdout.write(f'{name:<20}{value!r}')

        if exported == econ.c_b:
            self.stdout.write(self.style.WARNING('threshold met: B has stopped producing (P_B = 0)'))
        else:
            self.stdout.write('threshold sigma (eta_a* - 1) = C_B not reached; B keeps losing money')
