"""
Scenario files: INI-style documents read with configparser and validated
section by section with DRF serializers.

    [model]
    kind = one-good
    h0 = 2.0          ; optional: stocks and rates below are raw

    [good1]
    c_a = 1.0
    ...
"""
import configparser
from dataclasses import dataclass
from pathlib import Path

from core.exceptions import TradeflowError
from core.models import DepletionPolicy, GoodEconomy, MoneyState, NormalizedState, PriceSet, TwoGoodScenario
from integrator.models import SolverOptions
from region.models import GridSpec

from .serializers import ONE_GOOD, TWO_GOOD, ScenarioSerializer

SECTION_ORDER = ['model', 'good1', 'prices1', 'good2', 'prices2', 'initial', 'solver', 'grid']


class ScenarioError(TradeflowError):
    """A scenario file that cannot be used; ``errors`` maps section to messages."""

    def __init__(self, path, errors):
        self.path = str(path)
        self.errors = errors
        super().__init__('\n'.join(self.messages()))

    def messages(self):
        lines = []
        for section, detail in self.errors.items():
            if isinstance(detail, dict):
                for key, texts in detail.items():
                    for text in _as_list(texts):
                        lines.append(f'{self.path}: [{section}] {key}: {text}')
            else:
                for text in _as_list(detail):
                    lines.append(f'{self.path}: [{section}] {text}')
        return lines


def _as_list(detail):
    return [str(text) for text in detail] if isinstance(detail, (list, tuple)) else [str(detail)]


@dataclass(frozen=True)
class Scenario:
    """
    A validated scenario, already normalized. One-good scenarios always carry
    ``consumption`` (productions zero); ``econ`` only when productions are
    given or follow from ``eta_star``.
    """
    kind: str
    econ: GoodEconomy = None
    consumption: GoodEconomy = None
    eta_star: float = None
    prices: PriceSet = None
    initial: NormalizedState = None
    money0: MoneyState = None
    solver: SolverOptions = None
    two_good: TwoGoodScenario = None
    grid: GridSpec = None

    @property
    def is_one_good(self):
        return self.kind == ONE_GOOD


def _read(text, path):
    parser = configparser.ConfigParser(interpolation=None)
    try:
        parser.read_string(text, source=str(path))
    except configparser.Error as exc:
        raise ScenarioError(path, {'syntax': [str(exc).replace('\n', ' ')]}) from exc
    return {section: dict(parser[section]) for section in parser.sections()}


def load_scenario(text, path='<string>'):
    serializer = ScenarioSerializer(data=_read(text, path))
    if not serializer.is_valid():
        raise ScenarioError(path, serializer.errors)
    return serializer.save()


def parse_scenario(path):
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ScenarioError(path, {'file': [f'cannot read: {exc.strerror or exc}']}) from exc
    return load_scenario(text, path)


def _fields(value, names):
    return {name: repr(float(getattr(value, name))) for name in names}


def serialize_scenario(scenario):
    """Scenario file text that parses back to an equal ``scenario``."""
    sections = {'model': {'kind': scenario.kind}}

    if scenario.kind == ONE_GOOD:
        good = _fields(scenario.consumption, ['c_a', 'c_b', 'sigma'])
        if scenario.eta_star is not None:
            good['eta_star'] = repr(float(scenario.eta_star))
        elif scenario.econ is not None:
            good.update(_fields(scenario.econ, ['p_a', 'p_b']))
        sections['good1'] = good
        if scenario.prices is not None:
            sections['prices1'] = _fields(scenario.prices, ['x_a', 'x_b', 'y'])
        if scenario.initial is not None:
            initial = _fields(scenario.initial, ['eta_a', 'eta_b'])
            initial.update(_fields(scenario.money0 or MoneyState(), ['m_a', 'm_b']))
            sections['initial'] = initial
    elif scenario.kind == TWO_GOOD:
        s = scenario.two_good
        for name, good, eta_star in (('good1', s.good1, s.eta_a1), ('good2', s.good2, s.eta_b2)):
            sections[name] = {
                **_fields(good, ['p_a', 'p_b', 'c_a', 'c_b', 'sigma']),
                'eta_star': repr(float(eta_star)),
            }
        sections['prices1'] = _fields(s.prices1, ['x_a', 'x_b', 'y'])
        sections['prices2'] = _fields(s.prices2, ['x_a', 'x_b', 'y'])

    if scenario.solver is not None:
        sections['solver'] = {
            **_fields(scenario.solver, ['horizon', 'step', 'event_tol']),
            'depletion_policy': DepletionPolicy(scenario.solver.depletion_policy).value,
        }
    if scenario.grid is not None:
        g = scenario.grid
        sections['grid'] = {
            **_fields(g, ['sigma1_min', 'sigma1_max']),
            'sigma1_steps': str(g.sigma1_steps),
            **_fields(g, ['eta_min', 'eta_max']),
            'eta_steps': str(g.eta_steps),
        }

    blocks = []
    for name in SECTION_ORDER:
        if name in sections:
            body = ''.join(f'{key} = {value}\n' for key, value in sections[name].items())
            blocks.append(f'[{name}]\n{body}')
    return '\n'.join(blocks)
