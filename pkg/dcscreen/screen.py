"""DC-SIS: marginal distance-correlation utilities, ranking and selection."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from .dataset import Dataset
from .dcov import DistanceStats, ResponseDistances
from .errors import IncompatibleMethod, InvalidRule
from .parallel import chunked, map_ordered

logger = logging.getLogger(__name__)

# Feature blocks per pool task; fixed so chunking never depends on workers.
BLOCKS_PER_TASK = 64

METHODS = ("dcsis", "sis", "sirs")

_T0_DENOMINATOR = 1.0 + math.pi / 3.0 - math.sqrt(3.0)


@dataclass(frozen=True)
class TopD:
    d: int

    def __post_init__(self):
        if not isinstance(self.d, (int, np.integer)) or self.d < 1:
            raise InvalidRule(f"top-d needs a positive integer d, got {self.d!r}")

    def to_dict(self) -> dict:
        return {"rule": "top-d", "d": int(self.d)}


@dataclass(frozen=True)
class Threshold:
    c: float
    kappa: float

    def __post_init__(self):
        if not self.c > 0:
            raise InvalidRule(f"threshold constant c must be > 0, got {self.c!r}")
        if not 0 <= self.kappa < 0.5:
            raise InvalidRule(f"kappa must lie in [0, 0.5), got {self.kappa!r}")

    def cutoff(self, n: int) -> float:
        return self.c * float(n) ** (-self.kappa)

    def to_dict(self) -> dict:
        return {"rule": "threshold", "c": float(self.c), "kappa": float(self.kappa)}


SelectionRule = Union[TopD, Threshold]


@dataclass(frozen=True)
class ScreeningResult:
    utilities: np.ndarray
    ranking: Tuple[int, ...]
    selected: Tuple[int, ...]
    rule: SelectionRule
    n: Optional[int] = None
    method: str = "dcsis"
    warnings: Tuple[str, ...] = field(default=())

    def rank_of(self, block_id: int) -> int:
        return self.ranking.index(block_id) + 1


def _stats_task(task) -> List[DistanceStats]:
    blocks, response = task
    return response.stats_against(blocks)


def block_stats(data: Dataset, workers: int = 1) -> List[DistanceStats]:
    """``DistanceStats`` of every feature block against the full response."""
    response = ResponseDistances(data.y)
    blocks = [data.block(b.block_id) for b in data.groups]
    tasks = [(list(chunk), response) for chunk in chunked(blocks, BLOCKS_PER_TASK)]
    out: List[DistanceStats] = []
    for part in map_ordered(_stats_task, tasks, workers):
        out.extend(part)
    return out


def degenerate_warning(block_ids: Sequence[int]) -> Optional[str]:
    if not block_ids:
        return None
    shown = ", ".join(str(b) for b in block_ids[:5])
    more = "" if len(block_ids) <= 5 else f" (+{len(block_ids) - 5} more)"
    return (f"{len(block_ids)} degenerate block(s) with undefined dcorr set to utility 0: "
            f"{shown}{more}")


def dcsis_utilities(data: Dataset, workers: int = 1) -> np.ndarray:
    """Squared sample distance correlation of each block with the response."""
    utilities, _ = _dcsis(data, workers)
    return utilities


def _dcsis(data: Dataset, workers: int) -> Tuple[np.ndarray, Tuple[str, ...]]:
    stats = block_stats(data, workers)
    utilities = np.array([s.utility for s in stats], dtype=np.float64)
    degenerate = [b.block_id for b, s in zip(data.groups, stats) if not s.defined]
    message = degenerate_warning(degenerate)
    if message:
        logger.warning(message)
        return utilities, (message,)
    return utilities, ()


def rank_and_select(utilities, rule: SelectionRule, n: Optional[int] = None) -> ScreeningResult:
    """Order blocks by decreasing utility (ties -> lower block id) and select.

    ``n`` is required by the threshold rule.
    """
    u = np.asarray(utilities, dtype=np.float64).ravel()
    if u.size == 0:
        raise InvalidRule("cannot rank an empty utility vector")
    if not np.all(np.isfinite(u)) or np.any(u < 0):
        raise InvalidRule("utilities must be finite and non-negative")

    order = np.argsort(-u, kind="stable")
    ranking = tuple(int(i) + 1 for i in order)

    if isinstance(rule, TopD):
        if rule.d > u.size:
            raise InvalidRule(f"d={rule.d} exceeds the number of blocks G={u.size}")
        selected = ranking[:rule.d]
    elif isinstance(rule, Threshold):
        if n is None:
            raise InvalidRule("the threshold rule needs the sample size n")
        cut = rule.cutoff(n)
        selected = tuple(b for b in ranking if u[b - 1] >= cut)
    else:
        raise InvalidRule(f"unknown selection rule {rule!r}")

    return ScreeningResult(utilities=u, ranking=ranking, selected=selected, rule=rule, n=n)


def cutoff_d(n: int, multiplier: int = 1) -> int:
    """``multiplier * floor(n / ln n)``; n=200 gives 37, 74, 111."""
    if n < 3:
        raise InvalidRule(f"cutoff needs n >= 3, got {n}")
    if multiplier < 1:
        raise InvalidRule(f"multiplier must be a positive integer, got {multiplier}")
    return int(multiplier) * int(math.floor(n / math.log(n)))


def t0_of_rho(rho: float) -> float:
    """Population distance correlation of a bivariate normal pair with correlation rho."""
    if not -1.0 <= rho <= 1.0:
        raise ValueError(f"rho must lie in [-1, 1], got {rho}")
    r = abs(float(rho))
    numerator = (
        r * math.asin(r)
        + math.sqrt(1.0 - r * r)
        - r * math.asin(r / 2.0)
        - math.sqrt(4.0 - r * r)
        + 1.0
    )
    return math.sqrt(min(max(numerator / _T0_DENOMINATOR, 0.0), 1.0))


def utilities_for(data: Dataset, method: str,
                  workers: int = 1) -> Tuple[np.ndarray, Tuple[str, ...]]:
    from . import baselines

    if method == "dcsis":
        return _dcsis(data, workers)
    if method == "sis":
        return baselines.sis_utilities(data, workers), ()
    if method == "sirs":
        return baselines.sirs_utilities(data, workers), ()
    raise IncompatibleMethod(f"unknown screening method {method!r}; expected one of {METHODS}")


def screen(data: Dataset, method: str = "dcsis", rule: Optional[SelectionRule] = None,
           workers: int = 1) -> ScreeningResult:
    """Compute utilities with ``method`` and apply ``rule`` (default top-d1)."""
    if rule is None:
        rule = TopD(min(cutoff_d(max(data.n, 3)), data.n_blocks))
    utilities, warnings = utilities_for(data, method, workers)
    result = rank_and_select(utilities, rule, n=data.n)
    return ScreeningResult(
        utilities=result.utilities,
        ranking=result.ranking,
        selected=result.selected,
        rule=rule,
        n=data.n,
        method=method,
        warnings=warnings,
    )
