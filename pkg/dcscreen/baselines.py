"""Comparison screeners: Pearson-correlation SIS and SIRS.

Both require a univariate response and singleton blocks.

SIRS uses the sample statistic

    omega_k = (1/n) sum_j [ (1/n) sum_i x~_ik 1(Y_i < Y_j) ]^2

with x~ the standardized column (n-1 denominator) and a strict indicator, so
tied responses contribute nothing.
"""

from __future__ import annotations

import numpy as np

from .dataset import Dataset, standardize_columns
from .errors import UnsupportedGrouping, UnsupportedResponse
from .parallel import map_ordered

# Columns per pool task.
COLUMNS_PER_TASK = 256


def _require_univariate_singletons(data: Dataset, method: str) -> None:
    if data.q != 1:
        raise UnsupportedResponse(method, data.q)
    grouped = [b.block_id for b in data.groups if b.width > 1]
    if grouped:
        raise UnsupportedGrouping(method, grouped)


def _column_tasks(x: np.ndarray):
    p = x.shape[1]
    return [(a, min(a + COLUMNS_PER_TASK, p)) for a in range(0, p, COLUMNS_PER_TASK)]


def _sis_task(task) -> np.ndarray:
    xc, yc, y_norm = task
    norms = np.sqrt(np.einsum("ij,ij->j", xc, xc))
    num = np.abs(xc.T @ yc)
    with np.errstate(divide="ignore", invalid="ignore"):
        corr = np.where(norms > 0, num / (norms * y_norm), 0.0)
    return np.clip(corr, 0.0, 1.0)


def sis_utilities(data: Dataset, workers: int = 1) -> np.ndarray:
    """|Pearson correlation| of each predictor with Y; constant columns score 0."""
    _require_univariate_singletons(data, "sis")
    y = data.y[:, 0]
    yc = y - y.mean()
    y_norm = float(np.sqrt(yc @ yc))
    if y_norm == 0.0:
        return np.zeros(data.p)
    x = np.asarray(data.x)
    constant = np.ptp(x, axis=0) == 0
    xc = x - x.mean(axis=0)
    xc[:, constant] = 0.0
    tasks = [(np.ascontiguousarray(xc[:, a:b]), yc, y_norm) for a, b in _column_tasks(xc)]
    return np.concatenate(map_ordered(_sis_task, tasks, workers))


def _sirs_task(task) -> np.ndarray:
    xs, indicator = task
    n = xs.shape[0]
    m = (xs.T @ indicator) / n
    return (m * m).mean(axis=1)


def sirs_utilities(data: Dataset, workers: int = 1) -> np.ndarray:
    """Rank-indicator SIRS statistic of each predictor with Y."""
    _require_univariate_singletons(data, "sirs")
    y = data.y[:, 0]
    indicator = (y[:, None] < y[None, :]).astype(np.float64)
    xs = np.asarray(standardize_columns(data).x)
    tasks = [(np.ascontiguousarray(xs[:, a:b]), indicator) for a, b in _column_tasks(xs)]
    return np.concatenate(map_ordered(_sirs_task, tasks, workers))
