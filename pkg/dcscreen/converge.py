"""Empirical uniform-consistency diagnostic for the DC-SIS utilities.

For each n in a grid, draws ``seeds`` datasets, computes
err(n) = max_k |w_hat_k - w_tilde_k| against a large-sample surrogate
w_tilde of the population utilities, and tabulates how err(n) decays.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .errors import GridTooSmall, UsageError
from .parallel import map_ordered
from .screen import dcsis_utilities
from .simulate import CoeffDraw, ModelSpec, draw_coefficients, rng_for, simulate_dataset

logger = logging.getLogger(__name__)

DEFAULT_GRID = (50, 100, 200, 400)
# 3b redraws its coefficients inside every response draw, so its population
# utilities are not fixed across datasets.
CONVERGE_MODELS = ("1a", "1b", "1c", "1d", "2", "3a", "indep")

SURROGATE_REP = 2**31 - 1
COEFF_REP = 2**31 - 2
# Sample size used for a = 4 ln(n) / sqrt(n) in the fixed beta draw.
NOMINAL_N = 200


@dataclass(frozen=True)
class ConvergenceRow:
    n: int
    median_err: float
    mean_err: float
    q25_err: float
    q75_err: float
    max_err: float
    errors: Tuple[float, ...] = field(repr=False, default=())


@dataclass(frozen=True)
class ConvergenceReport:
    model: ModelSpec
    grid: Tuple[int, ...]
    seeds: int
    surrogate_n: int
    coeffs: CoeffDraw
    surrogate: Tuple[float, ...]
    rows: Tuple[ConvergenceRow, ...]

    def strictly_decreasing(self) -> bool:
        medians = [r.median_err for r in self.rows]
        return all(b < a for a, b in zip(medians, medians[1:]))

    def to_dict(self) -> dict:
        return {
            "model": self.model.to_dict(),
            "grid": list(self.grid),
            "seeds": self.seeds,
            "surrogate_n": self.surrogate_n,
            "coefficients": list(self.coeffs.beta),
            "surrogate_utilities": list(self.surrogate),
            "strictly_decreasing": self.strictly_decreasing(),
            "rows": [
                {
                    "n": r.n,
                    "median_err": r.median_err,
                    "mean_err": r.mean_err,
                    "q25_err": r.q25_err,
                    "q75_err": r.q75_err,
                    "max_err": r.max_err,
                }
                for r in self.rows
            ],
        }


def parse_grid(grid) -> Tuple[int, ...]:
    if isinstance(grid, str):
        values = [int(v) for v in grid.replace(";", ",").split(",") if v.strip()]
    else:
        values = [int(v) for v in grid]
    values = sorted(set(values))
    if len(values) < 2:
        raise GridTooSmall(values)
    if values[0] < 3:
        raise UsageError(f"grid sample sizes must be >= 3, got {values[0]}")
    return tuple(values)


def fixed_coefficients(master_seed: int) -> CoeffDraw:
    return draw_coefficients(NOMINAL_N, rng_for(master_seed, COEFF_REP))


def surrogate_utilities(model: ModelSpec, coeffs: CoeffDraw, surrogate_n: int,
                        workers: int = 1) -> np.ndarray:
    """Large-sample stand-in for the population utilities (exact zeros for ``indep``)."""
    if model.model_id == "indep":
        return np.zeros(model.p)
    big = replace(model, n=surrogate_n)
    data, _ = simulate_dataset(big, SURROGATE_REP, coeffs)
    logger.info("surrogate utilities from n=%d, p=%d", surrogate_n, model.p)
    return dcsis_utilities(data, workers)


def _error_task(task) -> float:
    model, rep, coeffs, surrogate = task
    data, _ = simulate_dataset(model, rep, coeffs)
    return float(np.max(np.abs(dcsis_utilities(data) - surrogate)))


def convergence_diagnostic(model_id: str = "1a", p: int = 50, rho: float = 0.5,
                           grid: Sequence[int] = DEFAULT_GRID, seeds: int = 20,
                           surrogate_n: int = 20000, master_seed: int = 0,
                           workers: int = 1,
                           surrogate: Optional[np.ndarray] = None) -> ConvergenceReport:
    if model_id not in CONVERGE_MODELS:
        raise UsageError(f"convergence diagnostic supports {', '.join(CONVERGE_MODELS)}, "
                         f"got {model_id!r}")
    grid = parse_grid(grid)
    if seeds < 1:
        raise UsageError(f"seeds must be >= 1, got {seeds}")
    base = ModelSpec(model_id, n=grid[0], p=p, rho=rho, seed=master_seed)
    coeffs = fixed_coefficients(master_seed)
    if surrogate is None:
        surrogate = surrogate_utilities(base, coeffs, surrogate_n, workers)
    surrogate = np.asarray(surrogate, dtype=np.float64)

    tasks = [(replace(base, n=n), rep, coeffs, surrogate) for n in grid for rep in range(seeds)]
    errors = map_ordered(_error_task, tasks, workers)

    rows: List[ConvergenceRow] = []
    for i, n in enumerate(grid):
        errs = np.array(errors[i * seeds:(i + 1) * seeds])
        q25, med, q75 = np.quantile(errs, [0.25, 0.5, 0.75])
        rows.append(ConvergenceRow(
            n=n,
            median_err=float(med),
            mean_err=float(errs.mean()),
            q25_err=float(q25),
            q75_err=float(q75),
            max_err=float(errs.max()),
            errors=tuple(float(e) for e in errs),
        ))
        logger.info("n=%d median max-error %.4f", n, med)

    return ConvergenceReport(
        model=base,
        grid=grid,
        seeds=seeds,
        surrogate_n=surrogate_n,
        coeffs=coeffs,
        surrogate=tuple(float(s) for s in surrogate),
        rows=tuple(rows),
    )
