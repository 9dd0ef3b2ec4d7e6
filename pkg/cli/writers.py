"""
Bit-stable output files: comma-separated tables with a one-line header and
17 significant digits, plus gnuplot scripts for ``--plot``.
"""
import math
from pathlib import Path

import numpy as np
import pandas as pd

from exchange.flow import flow_value
from region.models import REGION_COLUMNS

FLOAT_FORMAT = '%.17g'
SERIES_COLUMNS = ['t', 'eta_a', 'eta_b', 'regime', 'f']
MONEY_COLUMNS = ['m_a', 'm_b']
COMPARISON_COLUMNS = ['t', 'eta_a_analytic', 'eta_b_analytic', 'eta_a_numeric', 'eta_b_numeric', 'discrepancy']


def series_frame(times, stocks, regimes, money=None):
    frame = pd.DataFrame({
        't': np.asarray(times, dtype=float),
        'eta_a': stocks[:, 0],
        'eta_b': stocks[:, 1],
        'regime': [regime.value for regime in regimes],
        'f': [flow_value(eta_a, eta_b) for eta_a, eta_b in stocks],
    }, columns=SERIES_COLUMNS)
    if money is not None:
        frame['m_a'] = money[:, 0]
        frame['m_b'] = money[:, 1]
    return frame


def numeric_frame(series):
    return series_frame(series.times, series.stocks, series.regimes, series.money)


def analytic_times(trajectory, step):
    """Uniform grid of ``step`` up to the horizon, plus every segment boundary."""
    count = math.ceil(trajectory.horizon / step)
    grid = np.minimum(np.arange(count + 1) * step, trajectory.horizon)
    return np.unique(np.concatenate([grid, trajectory.boundaries, [trajectory.horizon]]))


def analytic_frame(trajectory, times):
    stocks = trajectory.sample(times)
    regimes = [trajectory.segments[index].regime for index in trajectory.segment_indices(times)]
    return series_frame(times, stocks, regimes)


def comparison_frame(times, analytic, numeric):
    discrepancy = np.max(np.abs(analytic - numeric), axis=1) if len(times) else np.empty(0)
    return pd.DataFrame({
        't': np.asarray(times, dtype=float),
        'eta_a_analytic': analytic[:, 0],
        'eta_b_analytic': analytic[:, 1],
        'eta_a_numeric': numeric[:, 0],
        'eta_b_numeric': numeric[:, 1],
        'discrepancy': discrepancy,
    }, columns=COMPARISON_COLUMNS)


def region_frame(scan):
    return scan.to_frame()[REGION_COLUMNS]


def table_text(frame):
    return frame.to_csv(index=False, float_format=FLOAT_FORMAT, lineterminator='\n')


def write_table(frame, path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(table_text(frame))
    return path


def sibling(path, suffix):
    """``run.csv`` -> ``run<suffix>``."""
    path = Path(path)
    return path.with_name(path.stem + suffix)


def series_plot_script(data_path, title):
    data = Path(data_path).name
    return (
        f"set datafile separator ','\n"
        f"set key autotitle columnhead\n"
        f"set title '{title}'\n"
        f"set xlabel 't'\n"
        f"set ylabel 'eta'\n"
        f"set arrow from graph 0, first 1 to graph 1, first 1 nohead dashtype 2\n"
        f"plot '{data}' using 1:2 with lines, '{data}' using 1:3 with lines\n"
    )


def region_plot_script(data_path, title):
    data = Path(data_path).name
    return (
        f"set datafile separator ','\n"
        f"set title '{title}'\n"
        f"set xlabel 'sigma1'\n"
        f"set ylabel 'eta_a1'\n"
        f"plot '{data}' every ::1 using 1:(strcol(8) eq \"True\" ? $2 : 1/0) with points pt 7 ps 0.3 notitle\n"
    )


def write_plot(script, data_path):
    path = Path(data_path).with_suffix('.gp')
    path.write_text(script)
    return path
