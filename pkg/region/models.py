import math
from dataclasses import dataclass, field

import numpy as np
import pandas as pd
from django.core.exceptions import ValidationError

REGION_COLUMNS = ['sigma1', 'eta_a1', 'k', 'dm_a', 'dm_b', 'p_a2', 'p_b1', 'feasible']


@dataclass(frozen=True)
class GridSpec:
    sigma1_min: float
    sigma1_max: float
    sigma1_steps: int
    eta_min: float
    eta_max: float
    eta_steps: int

    def __post_init__(self):
        self.clean()

    def clean(self):
        errors = {}
        for name in ('sigma1_min', 'sigma1_max', 'eta_min', 'eta_max'):
            value = getattr(self, name)
            if not math.isfinite(value):
                errors[name] = f'{name} must be finite (got {value!r})'
        if errors:
            raise ValidationError(errors)
        if not self.sigma1_min < self.sigma1_max:
            errors['sigma1_max'] = 'sigma1_min < sigma1_max required'
        if not self.eta_min < self.eta_max:
            errors['eta_max'] = 'eta_min < eta_max required'
        if not self.sigma1_steps >= 2:
            errors['sigma1_steps'] = 'at least 2 sigma1 nodes required'
        if not self.eta_steps >= 2:
            errors['eta_steps'] = 'at least 2 eta nodes required'
        if not self.sigma1_min >= 0:
            errors['sigma1_min'] = 'sigma1_min >= 0 required'
        if not self.eta_min >= 1:
            errors['eta_min'] = 'eta_min >= 1 required'
        if errors:
            raise ValidationError(errors)

    def sigma1_values(self):
        return [float(v) for v in np.linspace(self.sigma1_min, self.sigma1_max, self.sigma1_steps)]

    def eta_values(self):
        return [float(v) for v in np.linspace(self.eta_min, self.eta_max, self.eta_steps)]


@dataclass(frozen=True)
class KInterval:
    """
    Closed interval of k = sigma1 (eta_A1 - 1); ``upper`` may be infinite.

    When built from ``constraints``, membership is decided by those
    constraints at k rather than by the rounded endpoints.
    """
    lower: float
    upper: float
    constraints: tuple = field(default=(), compare=False, repr=False)

    @property
    def empty(self):
        return self.lower > self.upper

    def contains(self, k):
        if self.constraints:
            return k >= 0 and all(constraint.holds(k) for constraint in self.constraints)
        return not self.empty and self.lower <= k <= self.upper

    def __str__(self):
        if self.empty:
            return 'empty'
        return f'[{self.lower!r}, {self.upper!r}]'


@dataclass(frozen=True)
class RegionScan:
    """Feasibility results; ``results[i][j]`` is at eta_values[i], sigma1_values[j]."""
    grid: GridSpec
    sigma1_values: tuple
    eta_values: tuple
    results: tuple

    def feasible_mask(self):
        return np.array([[result.feasible for result in row] for row in self.results], dtype=bool)

    @property
    def feasible_count(self):
        return int(self.feasible_mask().sum())

    def nodes(self):
        for i, eta in enumerate(self.eta_values):
            for j, sigma1 in enumerate(self.sigma1_values):
                yield i, j, sigma1, eta, self.results[i][j]

    def to_frame(self):
        rows = [
            (sigma1, eta, r.k, r.dm_a, r.dm_b, r.p_a2, r.p_b1, r.feasible)
            for _, _, sigma1, eta, r in self.nodes()
        ]
        return pd.DataFrame(rows, columns=REGION_COLUMNS)
