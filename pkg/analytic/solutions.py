"""
Closed-form solutions of the balance equations, one per regime, and their
composition across threshold crossings.

Every stock component evolves as

    eta(tau) = eta0 + slope * tau + amplitude * (exp(-rate * tau) - 1)

with rate 0 without exchange, sigma when one country exports and 2 sigma
when both do. In the bilateral case the system is solved in the
coordinates s = eta_a + eta_b (zero eigenvalue, linear) and
d = eta_a - eta_b (eigenvalue 2 sigma).
"""
import logging
import math
from dataclasses import dataclass

import numpy as np
from django.conf import settings
from django.core.exceptions import ValidationError
from scipy.optimize import bisect

from core.exceptions import ChatterError, EventLocalizationError
from core.models import NormalizedState, Regime
from exchange.flow import regime_after

from .models import PiecewiseTrajectory, RegimeSegment

logger = logging.getLogger(__name__)

DEFAULT_EVENT_TOL = 1e-10


@dataclass(frozen=True)
class ComponentLaw:
    eta0: float
    slope: float
    amplitude: float = 0.0
    rate: float = 0.0

    def value(self, tau):
        linear = self.eta0 + self.slope * tau
        if self.amplitude == 0.0 or self.rate == 0.0:
            return linear
        return linear + self.amplitude * math.expm1(-self.rate * tau)

    def values(self, taus):
        """``value`` over an array of segment-local times."""
        linear = self.eta0 + self.slope * taus
        if self.amplitude == 0.0 or self.rate == 0.0:
            return linear
        return linear + self.amplitude * np.expm1(-self.rate * taus)

    def derivative(self, tau):
        return self.slope - self.rate * self.amplitude * math.exp(-self.rate * tau)

    def turning_time(self):
        """The single tau > 0 where the derivative vanishes, if there is one."""
        if self.rate == 0.0 or self.amplitude == 0.0 or self.slope == 0.0:
            return None
        ratio = self.slope / (self.rate * self.amplitude)
        if not 0.0 < ratio < 1.0:
            return None
        return -math.log(ratio) / self.rate


def _check_step(dt):
    if not dt >= 0:
        raise ValidationError({'dt': f'dt must be >= 0 (got {dt!r})'})


def _check_sigma(econ):
    if not econ.sigma > 0:
        raise ValidationError({'sigma': 'sigma must be > 0 for an exchange regime; dispatch sigma = 0 to no exchange'})


def _no_exchange_laws(state0, econ):
    constants = {'A1': state0.eta_a, 'B1': state0.eta_b}
    return ComponentLaw(state0.eta_a, econ.net_a), ComponentLaw(state0.eta_b, econ.net_b), constants


def _a_exports_laws(state0, econ):
    eta_star = (econ.net_a + econ.sigma) / econ.sigma
    a2 = state0.eta_a - eta_star
    constants = {'A2': a2, 'B2': state0.eta_b + a2}
    law_a = ComponentLaw(state0.eta_a, 0.0, a2, econ.sigma)
    law_b = ComponentLaw(state0.eta_b, econ.net_total, -a2, econ.sigma)
    return law_a, law_b, constants


def _b_exports_laws(state0, econ):
    law_b, law_a, constants = _a_exports_laws(state0.swapped(), econ.swapped())
    return law_a, law_b, constants


def _bilateral_laws(state0, econ):
    d_star = econ.net_difference / (2.0 * econ.sigma)
    gap = (state0.eta_a - state0.eta_b) - d_star
    constants = {'s0': state0.total, 'd_star': d_star, 'D': gap}
    rate = 2.0 * econ.sigma
    law_a = ComponentLaw(state0.eta_a, econ.net_total / 2.0, gap / 2.0, rate)
    law_b = ComponentLaw(state0.eta_b, econ.net_total / 2.0, -gap / 2.0, rate)
    return law_a, law_b, constants


_LAWS = {
    Regime.NO_EXCHANGE: _no_exchange_laws,
    Regime.A_EXPORTS: _a_exports_laws,
    Regime.B_EXPORTS: _b_exports_laws,
    Regime.BILATERAL: _bilateral_laws,
}


def regime_laws(regime, state0, econ):
    """Component laws and integration constants; sigma = 0 is always linear."""
    if econ.sigma == 0.0:
        return _no_exchange_laws(state0, econ)
    return _LAWS[regime](state0, econ)


def _evolve(laws, dt):
    law_a, law_b, _ = laws
    return NormalizedState(law_a.value(dt), law_b.value(dt))


def propagate(regime, state0, econ, dt):
    if dt == 0:
        return state0
    return _evolve(regime_laws(regime, state0, econ), dt)


def solve_no_exchange(state0, econ, dt):
    _check_step(dt)
    if dt == 0:
        return state0
    return _evolve(_no_exchange_laws(state0, econ), dt)


def solve_a_exports(state0, econ, dt):
    _check_sigma(econ)
    _check_step(dt)
    if dt == 0:
        return state0
    return _evolve(_a_exports_laws(state0, econ), dt)


def solve_b_exports(state0, econ, dt):
    return solve_a_exports(state0.swapped(), econ.swapped(), dt).swapped()


def solve_bilateral(state0, econ, dt):
    _check_sigma(econ)
    _check_step(dt)
    if dt == 0:
        return state0
    return _evolve(_bilateral_laws(state0, econ), dt)


def _exit_time(law, above, limit, event_tol):
    """First tau in (0, limit] where the component is strictly off its side."""
    def outside(tau):
        gap = law.value(tau) - 1.0
        return -gap if above else gap

    knots = [0.0]
    turn = law.turning_time()
    if turn is not None and turn < limit:
        knots.append(turn)
    knots.append(limit)

    # The law is monotone between knots, so one sign change per piece at most.
    for lo, hi in zip(knots, knots[1:]):
        if outside(hi) <= 0.0:
            continue
        if outside(lo) > 0.0:
            raise EventLocalizationError(
                'segment starts outside its own regime',
                diagnostics={'lo': lo, 'hi': hi, 'value_lo': law.value(lo), 'above': above},
            )
        tau = bisect(outside, lo, hi, xtol=event_tol)
        if outside(tau) <= 0.0:
            tau = min(tau + event_tol, hi)
        return tau
    return None


def first_crossing(state0, econ, horizon, event_tol=DEFAULT_EVENT_TOL):
    """(tau, component) of the first threshold crossing within ``horizon``, or None."""
    regime = regime_after(state0, econ)
    law_a, law_b, _ = regime_laws(regime, state0, econ)
    found = []
    for component, law, above in (('eta_a', law_a, regime.a_above), ('eta_b', law_b, regime.b_above)):
        tau = _exit_time(law, above, horizon, event_tol)
        if tau is not None:
            found.append((tau, component))
    return min(found) if found else None


def simulate_analytic(state0, econ, horizon, event_tol=DEFAULT_EVENT_TOL, max_segments=None):
    if not horizon > 0:
        raise ValidationError({'horizon': f'horizon must be > 0 (got {horizon!r})'})
    if not event_tol > 0:
        raise ValidationError({'event_tol': f'event_tol must be > 0 (got {event_tol!r})'})
    if max_segments is None:
        max_segments = settings.TRADEFLOW_MAX_SEGMENTS

    segments = []
    t, state = 0.0, state0
    while True:
        regime = regime_after(state, econ)
        laws = regime_laws(regime, state, econ)
        remaining = horizon - t
        crossing = first_crossing(state, econ, remaining, event_tol)

        if crossing is None or t + crossing[0] >= horizon:
            t_end, end = horizon, _evolve(laws, remaining)
        else:
            tau, component = crossing
            t_end = max(t + tau, math.nextafter(t, math.inf))
            end = _evolve(laws, tau)
            logger.debug('%s leaves its side at t=%.17g (regime %s)', component, t_end, regime.value)

        segments.append(RegimeSegment(regime, t, t_end, state, end, laws[2]))
        if t_end >= horizon:
            break
        if len(segments) >= max_segments:
            raise ChatterError(f'more than {max_segments} regime segments before t={t_end!r}')
        t, state = t_end, end

    logger.debug('closed-form trajectory with %d segment(s) up to t=%s', len(segments), horizon)
    return PiecewiseTrajectory(tuple(segments), horizon, econ)
