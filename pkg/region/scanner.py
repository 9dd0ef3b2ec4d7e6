"""
Grid scan of the (sigma1, eta_A1) plane.

Rows of the grid are independent; they are evaluated in a process pool and
assembled in row order, so the result does not depend on the number of
workers.
"""
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from functools import partial

from django.conf import settings

from money.rates import feasibility_check, k_constraints

from .models import KInterval, RegionScan

logger = logging.getLogger(__name__)


def _scan_row(scenario, constraints, sigma1_values, eta):
    return tuple(feasibility_check(scenario, sigma1, eta, constraints) for sigma1 in sigma1_values)


def scan_region(scenario, grid, workers=None):
    """
    Feasibility at every node. ``workers`` caps the pool size and defaults to
    ``TRADEFLOW_THREADS``; with one worker the rows run in this process.
    """
    if workers is None:
        workers = settings.TRADEFLOW_THREADS
    sigma1_values = tuple(grid.sigma1_values())
    eta_values = tuple(grid.eta_values())
    row = partial(_scan_row, scenario, tuple(k_constraints(scenario)), sigma1_values)

    if workers == 1:
        rows = tuple(map(row, eta_values))
    else:
        with ProcessPoolExecutor(max_workers=workers) as executor:
            rows = tuple(executor.map(row, eta_values, chunksize=max(1, len(eta_values) // 32)))

    logger.debug('scanned %d x %d nodes with workers=%s', len(eta_values), len(sigma1_values), workers)
    return RegionScan(grid, sigma1_values, eta_values, rows)


def feasible_k_interval(scenario):
    """Intersection of the four linear conditions with k >= 0."""
    constraints = tuple(k_constraints(scenario))
    lower, upper = 0.0, math.inf
    for constraint in constraints:
        if constraint.slope > 0:
            lower = max(lower, -constraint.intercept / constraint.slope)
        elif constraint.slope < 0:
            upper = min(upper, -constraint.intercept / constraint.slope)
        elif constraint.intercept < 0:
            logger.debug('%s fails for every k', constraint.name)
            return KInterval(math.inf, -math.inf, constraints)
    return KInterval(lower, upper, constraints)


def disagreements(scan, interval):
    """(i, j) of every node where the scan and ``interval.contains`` differ."""
    return [
        (i, j) for i, j, _, _, result in scan.nodes()
        if result.feasible != interval.contains(result.k)
    ]
