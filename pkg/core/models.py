"""
Value types of the two-country trade model.

Nothing here is stored in a database: these are frozen dataclasses that
validate themselves the way model ``clean()`` methods do. All quantities
are normalized (h0 = 1, vessel sections S_A = S_B = 1).
"""
import math
from dataclasses import dataclass, replace

from django.core.exceptions import ValidationError
from django.db import models


def _non_negative(values):
    return {
        name: f'{name} must be a finite value >= 0 (got {value!r})'
        for name, value in values.items()
        if not math.isfinite(value) or value < 0
    }


class Regime(models.TextChoices):
    """Which branch of the exchange function is active."""
    NO_EXCHANGE = 'no_exchange', 'No exchange'
    A_EXPORTS = 'a_exports', 'A exports'
    B_EXPORTS = 'b_exports', 'B exports'
    BILATERAL = 'bilateral', 'Bilateral'

    @classmethod
    def from_sides(cls, a_above, b_above):
        if a_above and b_above:
            return cls.BILATERAL
        if a_above:
            return cls.A_EXPORTS
        if b_above:
            return cls.B_EXPORTS
        return cls.NO_EXCHANGE

    @property
    def a_above(self):
        return self in (Regime.A_EXPORTS, Regime.BILATERAL)

    @property
    def b_above(self):
        return self in (Regime.B_EXPORTS, Regime.BILATERAL)

    def swapped(self):
        return Regime.from_sides(self.b_above, self.a_above)


class DepletionPolicy(models.TextChoices):
    CONTINUE = 'continue', 'Continue'
    CLAMP_TO_ZERO = 'clamp_to_zero', 'Clamp to zero'
    HALT = 'halt', 'Halt'


@dataclass(frozen=True)
class NormalizedState:
    """Stock levels of one good in units of the exchange threshold."""
    eta_a: float
    eta_b: float

    def __post_init__(self):
        self.clean()

    def clean(self):
        errors = {
            name: f'{name} must be finite (got {value!r})'
            for name, value in (('eta_a', self.eta_a), ('eta_b', self.eta_b))
            if not math.isfinite(value)
        }
        if errors:
            raise ValidationError(errors)

    @property
    def total(self):
        return self.eta_a + self.eta_b

    def swapped(self):
        return NormalizedState(self.eta_b, self.eta_a)


@dataclass(frozen=True)
class GoodEconomy:
    """Production, consumption and exchange rates of one good."""
    p_a: float
    p_b: float
    c_a: float
    c_b: float
    sigma: float

    def __post_init__(self):
        self.clean()

    def clean(self):
        errors = _non_negative({
            'p_a': self.p_a, 'p_b': self.p_b,
            'c_a': self.c_a, 'c_b': self.c_b,
            'sigma': self.sigma,
        })
        if errors:
            raise ValidationError(errors)

    @property
    def net_a(self):
        return self.p_a - self.c_a

    @property
    def net_b(self):
        return self.p_b - self.c_b

    @property
    def net_total(self):
        """P_s: rate of change of the total stock, whatever the regime."""
        return self.net_a + self.net_b

    @property
    def net_difference(self):
        return self.net_a - self.net_b

    def swapped(self):
        return GoodEconomy(p_a=self.p_b, p_b=self.p_a, c_a=self.c_b, c_b=self.c_a, sigma=self.sigma)


@dataclass(frozen=True)
class PriceSet:
    """Production costs in A and B and the converged international price."""
    x_a: float
    x_b: float
    y: float

    def __post_init__(self):
        self.clean()

    def clean(self):
        errors = _non_negative({'x_a': self.x_a, 'x_b': self.x_b, 'y': self.y})
        if errors:
            raise ValidationError(errors)

    @property
    def a_advantaged(self):
        return self.x_a < self.y < self.x_b

    @property
    def b_advantaged(self):
        return self.x_b < self.y < self.x_a

    @property
    def advantage(self):
        """'a', 'b' or None when neither strict ordering holds."""
        if self.a_advantaged:
            return 'a'
        if self.b_advantaged:
            return 'b'
        return None

    def swapped(self):
        return PriceSet(x_a=self.x_b, x_b=self.x_a, y=self.y)


@dataclass(frozen=True)
class MoneyState:
    m_a: float = 0.0
    m_b: float = 0.0


@dataclass(frozen=True)
class TwoGoodScenario:
    """
    Good 1 is exported by A, good 2 by B.

    Only consumptions of ``good1``/``good2`` enter the money analysis;
    productions are implied by the fixed point and sigma1 is swept.
    """
    good1: GoodEconomy
    good2: GoodEconomy
    prices1: PriceSet
    prices2: PriceSet
    eta_a1: float
    eta_b2: float = 2.0

    def with_eta_a1(self, eta_a1):
        return replace(self, eta_a1=eta_a1)


def normalize_raw(values, h0):
    """Divide raw stocks and rates by the threshold h0 (S_A = S_B = 1)."""
    if not math.isfinite(h0) or h0 <= 0:
        raise ValidationError({'h0': f'h0 must be > 0 (got {h0!r})'})
    return {name: value / h0 for name, value in values.items()}


def validate_scenario(scenario):
    """Return every violated structural assumption; an empty list means valid."""
    violations = []
    p1, p2 = scenario.prices1, scenario.prices2

    if not p1.x_a < p1.y:
        violations.append(f'prices1: x_a < y required (x_a={p1.x_a!r}, y={p1.y!r})')
    if not p1.y < p1.x_b:
        violations.append(f'prices1: y < x_b required (y={p1.y!r}, x_b={p1.x_b!r})')
    if not p2.x_b < p2.y:
        violations.append(f'prices2: x_b < y required (x_b={p2.x_b!r}, y={p2.y!r})')
    if not p2.y < p2.x_a:
        violations.append(f'prices2: y < x_a required (y={p2.y!r}, x_a={p2.x_a!r})')

    if not (math.isfinite(scenario.eta_a1) and scenario.eta_a1 > 1):
        violations.append(f'eta_a1 > 1 required (got {scenario.eta_a1!r})')
    if not (math.isfinite(scenario.eta_b2) and scenario.eta_b2 > 1):
        violations.append(f'eta_b2 > 1 required (got {scenario.eta_b2!r})')

    return violations


@dataclass(frozen=True)
class GuardEvent:
    """A stock crossing its exchange threshold, or running out."""
    time: float
    component: str
    direction: str
    kind: str = 'threshold'

    @property
    def description(self):
        level = 1 if self.kind == 'threshold' else 0
        return f'{self.component} crosses {level} {self.direction}'
