"""
The exchange function f and the piecewise right-hand side built on it.

f(eta_a, eta_b) = (eta_a - 1) theta(eta_a - 1) - (eta_b - 1) theta(eta_b - 1)

theta(0) = 0: a stock exactly on the threshold counts as below it. f is
continuous, so the convention never changes a trajectory.
"""
from core.models import Regime


def excess(eta):
    """(eta - 1) theta(eta - 1)."""
    return eta - 1.0 if eta > 1.0 else 0.0


def flow_value(eta_a, eta_b):
    return excess(eta_a) - excess(eta_b)


def exchange_flow(state):
    return flow_value(state.eta_a, state.eta_b)


def classify_regime(state):
    return Regime.from_sides(state.eta_a > 1.0, state.eta_b > 1.0)


def derivatives(eta_a, eta_b, econ):
    f = flow_value(eta_a, eta_b)
    return econ.net_a - econ.sigma * f, econ.net_b + econ.sigma * f


def rhs(state, econ):
    """(d eta_a/dt, d eta_b/dt); their sum is P_s whatever the state."""
    return derivatives(state.eta_a, state.eta_b, econ)


def _side_on_guard(first, second):
    # Leaves the guard upwards only if the motion points up.
    if first != 0.0:
        return first > 0.0
    return second > 0.0


def regime_after(state, econ):
    """
    Regime a trajectory enters from ``state``.

    Off the guard this is ``classify_regime``. A component exactly at 1 takes
    the side its first time derivative points to, or its second derivative
    when the first vanishes; the field is continuous, so both derivatives are
    the same whichever branch is used to compute them.
    """
    a_above = state.eta_a > 1.0
    b_above = state.eta_b > 1.0
    if state.eta_a != 1.0 and state.eta_b != 1.0:
        return Regime.from_sides(a_above, b_above)

    deta_a, deta_b = rhs(state, econ)
    if state.eta_a == 1.0:
        # f' = -theta_b * deta_b while eta_a is still.
        a_above = _side_on_guard(deta_a, econ.sigma * deta_b if b_above else 0.0)
    if state.eta_b == 1.0:
        b_above = _side_on_guard(deta_b, econ.sigma * deta_a if a_above else 0.0)
    return Regime.from_sides(a_above, b_above)
