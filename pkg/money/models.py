from dataclasses import dataclass


@dataclass(frozen=True)
class MarginCoefficients:
    """International price minus production cost, per country and good."""
    alpha1: float
    alpha2: float
    beta1: float
    beta2: float


@dataclass(frozen=True)
class TwoGoodRates:
    dm_a: float
    dm_b: float
    p_a1: float
    p_a2: float
    p_b1: float
    p_b2: float

    @property
    def productions(self):
        return self.p_a1, self.p_a2, self.p_b1, self.p_b2


@dataclass(frozen=True)
class TradeBalances:
    b_a1: float
    b_a2: float
    b_b1: float
    b_b2: float

    @property
    def total_a(self):
        return self.b_a1 + self.b_a2

    @property
    def total_b(self):
        return self.b_b1 + self.b_b2


@dataclass(frozen=True)
class FeasibilityResult:
    k: float
    dm_a: float
    dm_b: float
    p_a1: float
    p_a2: float
    p_b1: float
    p_b2: float
    money_a_ok: bool
    money_b_ok: bool
    prod_a2_ok: bool
    prod_b1_ok: bool

    @property
    def feasible(self):
        return self.money_a_ok and self.money_b_ok and self.prod_a2_ok and self.prod_b1_ok


@dataclass(frozen=True)
class LinearConstraint:
    """intercept + slope * k >= 0."""
    name: str
    intercept: float
    slope: float

    def value(self, k):
        return self.intercept + self.slope * k

    def holds(self, k):
        return self.value(k) >= 0
