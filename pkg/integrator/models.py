import math
from dataclasses import dataclass, field

import numpy as np
from django.core.exceptions import ValidationError

from core.models import DepletionPolicy, MoneyState, NormalizedState


@dataclass(frozen=True)
class SolverOptions:
    horizon: float
    step: float = 1e-3
    event_tol: float = 1e-10
    depletion_policy: DepletionPolicy = DepletionPolicy.HALT

    def __post_init__(self):
        self.clean()

    def clean(self):
        errors = {}
        for name in ('horizon', 'step', 'event_tol'):
            value = getattr(self, name)
            if not value > 0:
                errors[name] = f'{name} must be > 0 (got {value!r})'
            elif not math.isfinite(value):
                errors[name] = f'{name} must be finite (got {value!r})'
        if not errors and self.step > self.horizon:
            errors['step'] = f'step {self.step!r} exceeds horizon {self.horizon!r}'
        if self.depletion_policy not in DepletionPolicy.values:
            errors['depletion_policy'] = f'unknown depletion policy {self.depletion_policy!r}'
        if errors:
            raise ValidationError(errors)


@dataclass(frozen=True)
class TimeSeries:
    """Samples at every accepted step and at every event time."""
    times: np.ndarray
    stocks: np.ndarray
    regimes: list
    money: np.ndarray = None
    events: list = field(default_factory=list)
    halted: bool = False

    def __len__(self):
        return len(self.times)

    @property
    def money_states(self):
        if self.money is None:
            return None
        return [MoneyState(m_a, m_b) for m_a, m_b in self.money]

    @property
    def final_state(self):
        return NormalizedState(*self.stocks[-1])
