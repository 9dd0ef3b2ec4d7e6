"""
Money flows at the trade fixed points.

Country A exports good 1 (x_A1 < y1 < x_B1), country B exports good 2
(x_B2 < y2 < x_A2). With both trade balances matched, the exchange rate of
good 2 is tied to that of good 1 and every money rate becomes a linear
function of the single product k = sigma1 (eta_A1 - 1).

Feasibility is decided on the rates (dm >= 0), never on the ratio form,
whose direction flips with the sign of its denominators.
"""
from django.core.exceptions import ValidationError

from core.models import validate_scenario
from steady.fixed_points import fixed_point_production

from .models import FeasibilityResult, LinearConstraint, MarginCoefficients, TradeBalances, TwoGoodRates


def _require_valid(scenario):
    violations = validate_scenario(scenario)
    if violations:
        raise ValidationError({'scenario': violations})


def one_good_money_rates(econ, prices, eta_a_star):
    """
    (dm_A/dt, dm_B/dt) at the A-exports fixed point holding eta_a at
    ``eta_a_star``. Only C_A, C_B and sigma of ``econ`` are used.

    dm_A/dt = (y - x_A) P_A is never negative; dm_B/dt = (y - x_B) P_B is
    negative unless B has stopped producing.
    """
    if not prices.a_advantaged:
        raise ValidationError({'prices': f'x_a < y < x_b required (got {prices!r})'})
    p_a, p_b = fixed_point_production(eta_a_star, econ.c_a, econ.c_b, econ.sigma)
    return (prices.y - prices.x_a) * p_a, (prices.y - prices.x_b) * p_b


def margins(scenario):
    p1, p2 = scenario.prices1, scenario.prices2
    return MarginCoefficients(
        alpha1=p1.y - p1.x_a,
        alpha2=p2.y - p2.x_a,
        beta1=p1.y - p1.x_b,
        beta2=p2.y - p2.x_b,
    )


def balanced_sigma2(sigma1, eta_a1, eta_b2, y1, y2):
    """Exchange rate of good 2 that zeroes both countries' trade balances."""
    errors = {}
    if not eta_a1 > 1:
        errors['eta_a1'] = f'eta_a1 must be > 1 (got {eta_a1!r})'
    if not eta_b2 > 1:
        errors['eta_b2'] = f'eta_b2 must be > 1 (got {eta_b2!r})'
    if not y2 > 0:
        errors['y2'] = f'y2 must be > 0 (got {y2!r})'
    if errors:
        raise ValidationError(errors)
    return (eta_a1 - 1.0) / (eta_b2 - 1.0) * (y1 / y2) * sigma1


def trade_balances(scenario, sigma1, sigma2):
    exported1 = scenario.prices1.y * sigma1 * (scenario.eta_a1 - 1.0)
    exported2 = scenario.prices2.y * sigma2 * (scenario.eta_b2 - 1.0)
    return TradeBalances(b_a1=exported1, b_a2=-exported2, b_b1=-exported1, b_b2=exported2)


def implied_productions(scenario, sigma1, sigma2):
    """(P_A1, P_A2, P_B1, P_B2) at the two fixed points."""
    shipped1 = sigma1 * (scenario.eta_a1 - 1.0)
    shipped2 = sigma2 * (scenario.eta_b2 - 1.0)
    g1, g2 = scenario.good1, scenario.good2
    return g1.c_a + shipped1, g2.c_a - shipped2, g1.c_b - shipped1, g2.c_b + shipped2


def exchange_product(sigma1, eta_a1):
    """k = sigma1 (eta_A1 - 1), the only combination the balanced rates depend on."""
    return sigma1 * (eta_a1 - 1.0)


def rates_at_k(scenario, k):
    coeff = margins(scenario)
    g1, g2 = scenario.good1, scenario.good2
    # sigma2 (eta_B2 - 1) once the trade balances are matched
    shipped2 = k * scenario.prices1.y / scenario.prices2.y
    p_a1 = g1.c_a + k
    p_a2 = g2.c_a - shipped2
    p_b1 = g1.c_b - k
    p_b2 = g2.c_b + shipped2
    return TwoGoodRates(
        dm_a=coeff.alpha1 * p_a1 + coeff.alpha2 * p_a2,
        dm_b=coeff.beta1 * p_b1 + coeff.beta2 * p_b2,
        p_a1=p_a1,
        p_a2=p_a2,
        p_b1=p_b1,
        p_b2=p_b2,
    )


def two_good_money_rates(scenario, sigma1):
    _require_valid(scenario)
    if not sigma1 >= 0:
        raise ValidationError({'sigma1': f'sigma1 must be >= 0 (got {sigma1!r})'})
    return rates_at_k(scenario, exchange_product(sigma1, scenario.eta_a1))


def feasibility_at_k(scenario, k, constraints=None):
    """
    The four conditions at ``k``, evaluated through ``k_constraints`` so the
    booleans agree exactly with ``KInterval.contains``. Pass the constraints
    in when evaluating many nodes of one scenario.
    """
    if constraints is None:
        constraints = k_constraints(scenario)
    dm_a, dm_b, p_a2, p_b1 = constraints
    rates = rates_at_k(scenario, k)
    return FeasibilityResult(
        k=k,
        dm_a=dm_a.value(k),
        dm_b=dm_b.value(k),
        p_a1=rates.p_a1,
        p_a2=p_a2.value(k),
        p_b1=p_b1.value(k),
        p_b2=rates.p_b2,
        money_a_ok=dm_a.holds(k),
        money_b_ok=dm_b.holds(k),
        prod_a2_ok=p_a2.holds(k),
        prod_b1_ok=p_b1.holds(k),
    )


def feasibility_check(scenario, sigma1, eta_a1=None, constraints=None):
    """
    All four conditions at (sigma1, eta_a1); ``eta_a1`` defaults to the
    scenario's own fixed point. Validation of the scenario is left to the
    caller so grid scans can reach eta_a1 = 1.
    """
    if eta_a1 is None:
        eta_a1 = scenario.eta_a1
    if not sigma1 >= 0:
        raise ValidationError({'sigma1': f'sigma1 must be >= 0 (got {sigma1!r})'})
    return feasibility_at_k(scenario, exchange_product(sigma1, eta_a1), constraints)


def pre_elimination_rates(scenario, sigma1, sigma2):
    """
    Money rates with sigma2 and eta_B2 explicit, before the trade-balance
    relation is substituted.
    """
    p1, p2 = scenario.prices1, scenario.prices2
    g1, g2 = scenario.good1, scenario.good2
    shipped1 = sigma1 * (scenario.eta_a1 - 1.0)
    shipped2 = sigma2 * (scenario.eta_b2 - 1.0)
    p_a1, p_a2, p_b1, p_b2 = implied_productions(scenario, sigma1, sigma2)
    dm_a = -p1.x_a * p_a1 + p1.y * (g1.c_a + shipped1) - p2.x_a * p_a2 + p2.y * (g2.c_a - shipped2)
    dm_b = -p1.x_b * p_b1 + p1.y * (g1.c_b - shipped1) - p2.x_b * p_b2 + p2.y * (g2.c_b + shipped2)
    return TwoGoodRates(dm_a=dm_a, dm_b=dm_b, p_a1=p_a1, p_a2=p_a2, p_b1=p_b1, p_b2=p_b2)


def ratio_form_holds(scenario, sigma1, eta_a1=None):
    """
    (money_a_ok, money_b_ok) from P_A2 / P_A1 <= alpha1 / -alpha2 and
    P_B1 / P_B2 <= beta2 / -beta1; None where a denominator is not positive.
    """
    if eta_a1 is None:
        eta_a1 = scenario.eta_a1
    rates = rates_at_k(scenario, exchange_product(sigma1, eta_a1))
    if rates.p_a1 <= 0 or rates.p_b2 <= 0:
        return None
    coeff = margins(scenario)
    return (
        rates.p_a2 / rates.p_a1 <= coeff.alpha1 / -coeff.alpha2,
        rates.p_b1 / rates.p_b2 <= coeff.beta2 / -coeff.beta1,
    )


def k_constraints(scenario):
    """The four feasibility conditions as linear functions of k."""
    coeff = margins(scenario)
    g1, g2 = scenario.good1, scenario.good2
    ratio = scenario.prices1.y / scenario.prices2.y
    return [
        LinearConstraint('dm_a', coeff.alpha1 * g1.c_a + coeff.alpha2 * g2.c_a, coeff.alpha1 - coeff.alpha2 * ratio),
        LinearConstraint('dm_b', coeff.beta1 * g1.c_b + coeff.beta2 * g2.c_b, coeff.beta2 * ratio - coeff.beta1),
        LinearConstraint('p_a2', g2.c_a, -ratio),
        LinearConstraint('p_b1', g1.c_b, -1.0),
    ]
