"""
Fixed-step classical Runge-Kutta integration of the balance equations.

Guard crossings (a stock passing 1) and depletion (a stock passing 0) are
located inside the step by bisection on the step length; integration then
restarts from the crossing. This is the numeric oracle the closed forms
are checked against, so it only shares the right-hand side with them.
"""
import logging
import math
from functools import lru_cache

import numpy as np
from django.core.exceptions import ValidationError
from scipy.optimize import bisect

from core.models import DepletionPolicy, GuardEvent, NormalizedState
from exchange.flow import flow_value, regime_after

from .models import TimeSeries

logger = logging.getLogger(__name__)

COMPONENTS = ('eta_a', 'eta_b')


def _rk4(y, field, h):
    half = 0.5 * h
    k1 = field(y)
    k2 = field([yi + half * ki for yi, ki in zip(y, k1)])
    k3 = field([yi + half * ki for yi, ki in zip(y, k2)])
    k4 = field([yi + h * ki for yi, ki in zip(y, k3)])
    sixth = h / 6.0
    return tuple([
        yi + sixth * (a + 2.0 * b + 2.0 * c + d)
        for yi, a, b, c, d in zip(y, k1, k2, k3, k4)
    ])


def stock_field(econ):
    net_a, net_b, sigma = econ.net_a, econ.net_b, econ.sigma

    def field(y):
        f = flow_value(y[0], y[1])
        return (net_a - sigma * f, net_b + sigma * f)

    return field


def stock_stepper(econ):
    """
    ``_rk4`` on ``stock_field(econ)`` unrolled for the two stocks; the
    arithmetic is the same operation for operation.
    """
    net_a, net_b, sigma = econ.net_a, econ.net_b, econ.sigma

    def step(y, h):
        a, b = y
        half = 0.5 * h
        f = flow_value(a, b)
        k1a, k1b = net_a - sigma * f, net_b + sigma * f
        f = flow_value(a + half * k1a, b + half * k1b)
        k2a, k2b = net_a - sigma * f, net_b + sigma * f
        f = flow_value(a + half * k2a, b + half * k2b)
        k3a, k3b = net_a - sigma * f, net_b + sigma * f
        f = flow_value(a + h * k3a, b + h * k3b)
        k4a, k4b = net_a - sigma * f, net_b + sigma * f
        sixth = h / 6.0
        return (
            a + sixth * (k1a + 2.0 * k2a + 2.0 * k3a + k4a),
            b + sixth * (k1b + 2.0 * k2b + 2.0 * k3b + k4b),
        )

    return step


def money_field(econ, prices):
    """
    Stocks plus money holdings (m_a, m_b).

    Each country pays x per unit produced and earns y per unit consumed at
    home or shipped abroad: dm_a/dt = -x_a P_a + y (C_a + sigma f) and
    dm_b/dt = -x_b P_b + y (C_b - sigma f). At a fixed point of the A-exports
    regime this is exactly the usual pair of money rates.
    """
    stocks = stock_field(econ)
    cost_a = prices.x_a * econ.p_a
    cost_b = prices.x_b * econ.p_b
    price, sigma, c_a, c_b = prices.y, econ.sigma, econ.c_a, econ.c_b

    def field(y):
        deta_a, deta_b = stocks(y)
        shipped = sigma * flow_value(y[0], y[1])
        return (
            deta_a,
            deta_b,
            -cost_a + price * (c_a + shipped),
            -cost_b + price * (c_b - shipped),
        )

    return field


def rk4_step(state, econ, h):
    if not h > 0:
        raise ValidationError({'h': f'step must be > 0 (got {h!r})'})
    return NormalizedState(*_rk4((state.eta_a, state.eta_b), stock_field(econ), h))


@lru_cache(maxsize=None)
def _guards(regime, depleted):
    """
    Guards to watch for ``regime`` and the ``depleted`` flags (a tuple).

    Returns the (component index, kind, outside(y)) triples and, per
    component, the closed band the stock may end a step in without
    violating any of them.
    """
    guards, bands = [], []
    for index, above in enumerate((regime.a_above, regime.b_above)):
        if above:
            guards.append((index, 'threshold', lambda y, i=index: 1.0 - y[i]))
            bands.append((1.0, math.inf))
        else:
            guards.append((index, 'threshold', lambda y, i=index: y[i] - 1.0))
            bands.append((-math.inf if depleted[index] else 0.0, 1.0))
        if not depleted[index]:
            guards.append((index, 'depletion', lambda y, i=index: -y[i]))
    return guards, tuple(bands)


def _was_above(regime, index):
    return regime.a_above if index == 0 else regime.b_above


def _locate(y, y_end, field, h, guards, event_tol):
    """Earliest guard violated at the end of the step, located inside it."""
    earliest = None
    for index, kind, outside in guards:
        if outside(y_end) <= 0.0:
            continue

        def crossed(tau, outside=outside):
            return outside(_rk4(y, field, tau)) if tau > 0 else outside(y)

        if crossed(0.0) > 0.0:
            # Already beyond at the start: only when restarting on the guard itself.
            continue
        tau = bisect(crossed, 0.0, h, xtol=event_tol)
        if crossed(tau) <= 0.0:
            tau = min(tau + event_tol, h)
        if earliest is None or tau < earliest[0]:
            earliest = (tau, index, kind)
    return earliest


def integrate_with_events(state0, econ, prices=None, opts=None, money0=None):
    if opts is None:
        raise ValidationError({'opts': 'solver options are required'})

    with_money = prices is not None
    if with_money:
        field = money_field(econ, prices)

        def advance(y, h):
            return _rk4(y, field, h)
    else:
        field = stock_field(econ)
        advance = stock_stepper(econ)
    y = (state0.eta_a, state0.eta_b)
    if with_money:
        y = y + ((money0.m_a, money0.m_b) if money0 is not None else (0.0, 0.0))

    policy = opts.depletion_policy
    horizon, step, event_tol = opts.horizon, opts.step, opts.event_tol
    t = 0.0
    regime = regime_after(state0, econ)
    depleted = [state0.eta_a < 0.0, state0.eta_b < 0.0]
    guards, ((low_a, high_a), (low_b, high_b)) = _guards(regime, tuple(depleted))
    times, samples, regimes, events = [t], [y], [regime], []
    halted = False

    while t < horizon:
        remaining = horizon - t
        h = step if step < remaining else remaining
        y_end = advance(y, h)
        if low_a <= y_end[0] <= high_a and low_b <= y_end[1] <= high_b:
            hit = None
        else:
            hit = _locate(y, y_end, field, h, guards, event_tol)

        if hit is None:
            y = y_end
            t = horizon if h == remaining else t + h
        else:
            tau, index, kind = hit
            y = advance(y, tau)
            t = t + tau
            direction = 'downward' if kind == 'depletion' or _was_above(regime, index) else 'upward'
            events.append(GuardEvent(t, COMPONENTS[index], direction, kind))
            logger.debug('%s %s event at t=%.17g', COMPONENTS[index], kind, t)
            if kind == 'depletion':
                depleted[index] = True
                if policy == DepletionPolicy.HALT:
                    times.append(t)
                    samples.append(y)
                    regimes.append(regime)
                    halted = True
                    logger.info('integration halted: %s depleted at t=%.17g', COMPONENTS[index], t)
                    break

        watch_changed = hit is not None
        if depleted[0] or depleted[1]:
            if policy == DepletionPolicy.CLAMP_TO_ZERO:
                y = tuple(0.0 if i < 2 and depleted[i] and v < 0.0 else v for i, v in enumerate(y))
            for index in range(2):
                if depleted[index] and y[index] > 0.0:
                    depleted[index] = False
                    watch_changed = True

        if hit is not None:
            regime = regime_after(NormalizedState(y[0], y[1]), econ)
        if watch_changed:
            guards, ((low_a, high_a), (low_b, high_b)) = _guards(regime, tuple(depleted))
        times.append(t)
        samples.append(y)
        regimes.append(regime)

    values = np.array(samples, dtype=float)
    return TimeSeries(
        times=np.array(times, dtype=float),
        stocks=values[:, :2].copy(),
        regimes=regimes,
        money=values[:, 2:].copy() if with_money else None,
        events=events,
        halted=halted,
    )
