"""
Stationary states of the balance equations.

At a fixed point of the A-exports regime the productions are implied by
the consumptions and the exported excess k = sigma (eta_a* - 1):
P_A = C_A + k and P_B = C_B - k. Country B stops producing once k = C_B.
"""
import logging
from dataclasses import dataclass, field

from django.core.exceptions import ValidationError

from core.exceptions import InfeasibleProductionError
from core.models import GoodEconomy, Regime
from exchange.flow import rhs

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class RegimeEquilibrium:
    """
    What the dynamics settle to inside one regime's region.

    ``exists`` is True when a full stationary point (both derivatives zero)
    lies in the region; ``attractor`` holds the value the contracting
    coordinate tends to, and ``rate`` its contraction rate.
    """
    regime: Regime
    exists: bool
    attractor: dict = field(default_factory=dict)
    rate: float = 0.0
    note: str = ''


def fixed_point_production(eta_a_star, c_a, c_b, sigma):
    """(P_A, P_B) holding eta_a at ``eta_a_star`` while A exports."""
    errors = {}
    if not eta_a_star > 1:
        errors['eta_a_star'] = f'eta_a_star must be > 1 (got {eta_a_star!r})'
    if not sigma >= 0:
        errors['sigma'] = f'sigma must be >= 0 (got {sigma!r})'
    if errors:
        raise ValidationError(errors)

    exported = sigma * (eta_a_star - 1.0)
    p_a = c_a + exported
    p_b = c_b - exported
    if p_b < 0:
        raise InfeasibleProductionError(
            f'implied P_B = {p_b!r} < 0: sigma (eta_a - 1) = {exported!r} exceeds C_B = {c_b!r}',
            production=p_b,
            bound=c_b,
        )
    return p_a, p_b


def fixed_point_economy(eta_a_star, c_a, c_b, sigma):
    p_a, p_b = fixed_point_production(eta_a_star, c_a, c_b, sigma)
    return GoodEconomy(p_a=p_a, p_b=p_b, c_a=c_a, c_b=c_b, sigma=sigma)


def is_steady_state(state, econ, tol):
    if not tol > 0:
        raise ValidationError({'tol': f'tol must be > 0 (got {tol!r})'})
    deta_a, deta_b = rhs(state, econ)
    return abs(deta_a) <= tol and abs(deta_b) <= tol


def _exporter_equilibrium(regime, net_exporter, net_total, sigma, tol, exporter, importer):
    eta_star = (net_exporter + sigma) / sigma
    attractor = {exporter: eta_star}
    if not eta_star > 1:
        return RegimeEquilibrium(
            regime, False, attractor, sigma,
            f'{exporter} relaxes towards {eta_star!r} <= 1 and leaves the region',
        )
    if abs(net_total) > tol:
        return RegimeEquilibrium(
            regime, False, attractor, sigma,
            f'{importer} drifts at rate P_s = {net_total!r}; stationary only if P_s = 0',
        )
    return RegimeEquilibrium(
        regime, True, attractor, sigma,
        f'stationary at {exporter} = {eta_star!r} for any {importer} <= 1',
    )


def regime_equilibria(econ, tol=1e-12):
    """Per-regime stationary points; only the no-exchange case when sigma = 0."""
    balanced = abs(econ.net_a) <= tol and abs(econ.net_b) <= tol
    results = [RegimeEquilibrium(
        Regime.NO_EXCHANGE,
        balanced,
        {},
        0.0,
        'every state with eta_a, eta_b <= 1 is stationary' if balanced
        else 'decoupled linear drift at rates (P_A - C_A, P_B - C_B)',
    )]
    if econ.sigma == 0:
        logger.debug('sigma = 0: exchange regimes reduce to the decoupled case')
        return results

    results.append(_exporter_equilibrium(
        Regime.A_EXPORTS, econ.net_a, econ.net_total, econ.sigma, tol, 'eta_a', 'eta_b'))
    results.append(_exporter_equilibrium(
        Regime.B_EXPORTS, econ.net_b, econ.net_total, econ.sigma, tol, 'eta_b', 'eta_a'))

    d_star = econ.net_difference / (2.0 * econ.sigma)
    rate = 2.0 * econ.sigma
    if abs(econ.net_total) > tol:
        results.append(RegimeEquilibrium(
            Regime.BILATERAL, False, {'d': d_star}, rate,
            f'total stock grows linearly at P_s = {econ.net_total!r}',
        ))
    else:
        results.append(RegimeEquilibrium(
            Regime.BILATERAL, True, {'d': d_star}, rate,
            f'stationary on the line eta_a - eta_b = {d_star!r} with eta_a, eta_b > 1',
        ))
    return results
