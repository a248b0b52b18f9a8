"""Monte Carlo harness for the screening simulation study.

Designs are N(0, Sigma) with sigma_ij = rho^|i-j|.  Seven response models are
available (1a-1d, the grouped-dummy model 2, and the bivariate-response models
3a/3b) plus ``indep``, a pure-noise response used by the convergence
diagnostic.  Every replication draws from its own generator seeded by
``child_seed(master_seed, rep_index)``, so replications can run in any order or
process and still aggregate to identical reports.
"""

from __future__ import annotations

import logging
from dataclasses import asdict, dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.signal import lfilter
from scipy.stats import norm

from .dataset import Dataset, FeatureBlock, singleton_blocks
from .errors import IncompatibleMethod, InvalidPreset, MissingActiveBlock, UsageError
from .parallel import chunked, map_ordered
from .screen import METHODS, cutoff_d, utilities_for, rank_and_select, TopD

logger = logging.getLogger(__name__)

MODELS = ("1a", "1b", "1c", "1d", "2", "3a", "3b", "indep")
DEFAULT_C = (2.0, 0.5, 3.0, 2.0)
QUANTILE_PROBS = (0.05, 0.25, 0.50, 0.75, 0.95)
CUT_MODES = ("population", "sample")

# Only DC-SIS handles grouped blocks and multivariate responses.
DCSIS_ONLY = frozenset({"2", "3a", "3b"})

# Replications per pool task.
REPS_PER_TASK = 4


@dataclass(frozen=True)
class ModelSpec:
    model_id: str
    n: int = 200
    p: int = 2000
    rho: float = 0.5
    c_coeffs: Tuple[float, float, float, float] = DEFAULT_C
    seed: int = 0
    cut_mode: str = "population"

    def __post_init__(self):
        if self.model_id not in MODELS:
            raise UsageError(
                f"unknown model {self.model_id!r}; expected one of {', '.join(MODELS)}")
        if self.n < 3:
            raise UsageError(f"n must be >= 3, got {self.n}")
        if self.p < 25:
            raise UsageError(f"p must be >= 25 (models reference X22), got {self.p}")
        if not 0.0 < self.rho < 1.0:
            raise UsageError(f"rho must lie in (0, 1), got {self.rho}")
        if self.seed < 0:
            raise UsageError(f"seed must be a non-negative integer, got {self.seed}")
        if len(self.c_coeffs) != 4:
            raise UsageError("c_coeffs needs exactly four constants")
        if self.cut_mode not in CUT_MODES:
            raise UsageError(f"cut_mode must be one of {CUT_MODES}, got {self.cut_mode!r}")
        object.__setattr__(self, "c_coeffs", tuple(float(c) for c in self.c_coeffs))

    @property
    def q(self) -> int:
        return 2 if self.model_id in ("3a", "3b") else 1

    def to_dict(self) -> dict:
        d = asdict(self)
        d["c_coeffs"] = list(self.c_coeffs)
        return d


@dataclass(frozen=True)
class CoeffDraw:
    beta: Tuple[float, ...]
    a: float
    u_flags: Tuple[int, ...]
    z: Tuple[float, ...]


@dataclass(frozen=True)
class ReplicationOutcome:
    rep_index: int
    ranking: Tuple[int, ...]
    true_active: Tuple[int, ...]
    min_model_size: int
    selected_at: Dict[int, Tuple[bool, ...]]


@dataclass
class EvalReport:
    method: str
    model: ModelSpec
    replications: int
    cutoffs: Tuple[int, ...]
    active_blocks: Tuple[int, ...]
    active_labels: Tuple[str, ...]
    s_quantiles: Dict[float, float]
    ps_table: Dict[int, Tuple[float, ...]]
    pa_table: Dict[int, float]
    s_values: Tuple[int, ...] = field(default=(), repr=False)

    @classmethod
    def from_outcomes(cls, method: str, model: ModelSpec, outcomes: Sequence[ReplicationOutcome],
                      cutoffs: Sequence[int], labels: Sequence[str],
                      probs: Sequence[float] = QUANTILE_PROBS) -> "EvalReport":
        if not outcomes:
            raise UsageError("cannot summarize zero replications")
        outcomes = sorted(outcomes, key=lambda o: o.rep_index)
        sizes = [o.min_model_size for o in outcomes]
        qs = quantiles(sizes, probs)
        ps, pa = {}, {}
        for d in cutoffs:
            hits = np.array([o.selected_at[d] for o in outcomes], dtype=bool)
            ps[d] = tuple(float(v) for v in hits.mean(axis=0))
            pa[d] = float(hits.all(axis=1).mean())
        return cls(
            method=method,
            model=model,
            replications=len(outcomes),
            cutoffs=tuple(cutoffs),
            active_blocks=outcomes[0].true_active,
            active_labels=tuple(labels),
            s_quantiles={float(p): float(v) for p, v in zip(probs, qs)},
            ps_table=ps,
            pa_table=pa,
            s_values=tuple(sizes),
        )

    def median_s(self) -> float:
        return self.s_quantiles[0.5]


def child_seed(master_seed: int, rep_index: int) -> int:
    """Counter-based per-replication seed; independent of execution order."""
    seq = np.random.SeedSequence(entropy=int(master_seed), spawn_key=(int(rep_index),))
    return int(seq.generate_state(1, dtype=np.uint64)[0])


def rng_for(master_seed: int, rep_index: int) -> np.random.Generator:
    return np.random.default_rng(child_seed(master_seed, rep_index))


def sample_ar1_normal(n: int, p: int, rho: float, rng: np.random.Generator) -> np.ndarray:
    """n rows of N(0, Sigma), sigma_ij = rho^|i-j|, via the exact AR(1) recursion.

    X_1 = Z_1 and X_j = rho X_{j-1} + sqrt(1 - rho^2) Z_j along each row.
    """
    if not 0.0 < rho < 1.0:
        raise UsageError(f"rho must lie in (0, 1), got {rho}")
    scale = np.sqrt(1.0 - rho * rho)
    z = rng.standard_normal((n, p))
    z[:, 0] /= scale
    x = lfilter([scale], [1.0, -rho], z, axis=1)
    return np.asfortranarray(x)


def draw_coefficients(n: int, rng: np.random.Generator) -> CoeffDraw:
    """beta_j = (-1)^U (a + |Z|), a = 4 ln(n) / sqrt(n), U ~ Bernoulli(0.4)."""
    a = 4.0 * np.log(n) / np.sqrt(n)
    u = rng.binomial(1, 0.4, size=4)
    z = rng.standard_normal(4)
    beta = np.where(u == 1, -1.0, 1.0) * (a + np.abs(z))
    return CoeffDraw(
        beta=tuple(float(b) for b in beta),
        a=float(a),
        u_flags=tuple(int(v) for v in u),
        z=tuple(float(v) for v in z),
    )


def grouped_cut_points(mode: str, x12: Optional[np.ndarray] = None) -> np.ndarray:
    """25/50/75% cut points of X12: N(0,1) quartiles or the sample's own."""
    if mode == "population":
        return norm.ppf([0.25, 0.5, 0.75])
    if mode == "sample":
        if x12 is None:
            raise UsageError("sample cut points need the X12 column")
        return np.quantile(x12, [0.25, 0.5, 0.75])
    raise UsageError(f"cut_mode must be one of {CUT_MODES}, got {mode!r}")


def dummy_block(x12: np.ndarray, cuts: np.ndarray) -> np.ndarray:
    q1, q2, q3 = cuts
    return np.column_stack([
        x12 < q1,
        (q1 <= x12) & (x12 < q2),
        (q2 <= x12) & (x12 < q3),
    ]).astype(np.float64)


def true_active(model_id: str) -> Tuple[int, ...]:
    if model_id in ("1a", "1b", "1c", "1d", "2"):
        return (1, 2, 12, 22)
    if model_id == "3a":
        return (1, 2)
    if model_id == "3b":
        return (1, 2, 3, 4)
    return ()


def gen_response(model: ModelSpec, x: np.ndarray, coeffs: CoeffDraw,
                 rng: np.random.Generator, eps: Optional[np.ndarray] = None) -> np.ndarray:
    """Draw the n x q response for ``model`` given the raw AR(1) design ``x``.

    ``eps`` overrides the N(0,1) noise (for the scalar models) when given.
    """
    mid = model.model_id
    n = x.shape[0]
    if x.shape[1] < 22 and mid != "indep":
        raise UsageError(f"model {mid} references X22 but the design has {x.shape[1]} columns")
    c1, c2, c3, c4 = model.c_coeffs
    b = coeffs.beta
    x1, x2, x12, x22 = x[:, 0], x[:, 1], x[:, 11], x[:, 21]

    if mid in ("3a", "3b"):
        if mid == "3a":
            sigma = np.sin(0.8 * x1 + 0.6 * x2)
        else:
            beta2 = 2.0 - rng.uniform(0.0, 1.0, size=4)
            # (e^t - 1) / (e^t + 1) == tanh(t / 2)
            sigma = np.tanh((x[:, :4] @ beta2) / 2.0)
        e = rng.standard_normal((n, 2))
        # Per-row 2x2 Cholesky of [[1, s], [s, 1]].
        y1 = e[:, 0]
        y2 = sigma * e[:, 0] + np.sqrt(np.clip(1.0 - sigma * sigma, 0.0, None)) * e[:, 1]
        return np.column_stack([y1, y2])

    if eps is None:
        eps = rng.standard_normal(n)
    ind12 = (x12 < 0).astype(np.float64)

    if mid == "1a":
        y = c1 * b[0] * x1 + c2 * b[1] * x2 + c3 * b[2] * ind12 + c4 * b[3] * x22 + eps
    elif mid == "1b":
        y = c1 * b[0] * x1 * x2 + c3 * b[1] * ind12 + c4 * b[2] * x22 + eps
    elif mid == "1c":
        y = c1 * b[0] * x1 * x2 + c3 * b[1] * ind12 * x22 + eps
    elif mid == "1d":
        y = c1 * b[0] * x1 + c2 * b[1] * x2 + c3 * b[2] * ind12 + np.exp(c4 * np.abs(x22)) * eps
    elif mid == "2":
        q1, q2, q3 = grouped_cut_points(model.cut_mode, x12)
        levels = (x12 < q1) + 1.5 * ((q1 <= x12) & (x12 < q2)) + 2.0 * ((q2 <= x12) & (x12 < q3))
        y = c1 * b[0] * x1 + c2 * b[1] * x2 + c3 * b[2] * levels + c4 * b[3] * x22 + eps
    elif mid == "indep":
        y = eps
    else:
        raise UsageError(f"unknown model {mid!r}")
    return y.reshape(-1, 1)


def build_design(model: ModelSpec, x: np.ndarray
                 ) -> Tuple[np.ndarray, Tuple[FeatureBlock, ...], Tuple[str, ...]]:
    """Screening design; model 2 swaps X12 for its three-column dummy block."""
    p = x.shape[1]
    names = tuple(f"X{k + 1}" for k in range(p))
    if model.model_id != "2":
        return x, singleton_blocks(p), names
    x12 = x[:, 11]
    dummies = dummy_block(x12, grouped_cut_points(model.cut_mode, x12))
    design = np.hstack([x[:, :11], dummies, x[:, 12:]])
    blocks = [FeatureBlock(k + 1, (k,)) for k in range(11)]
    blocks.append(FeatureBlock(12, (11, 12, 13)))
    blocks.extend(FeatureBlock(k + 1, (k + 2,)) for k in range(12, p))
    return design, tuple(blocks), names


def simulate_dataset(model: ModelSpec, rep_index: int,
                     coeffs: Optional[CoeffDraw] = None) -> Tuple[Dataset, Tuple[int, ...]]:
    """One replication's screening data and its true active block ids."""
    rng = rng_for(model.seed, rep_index)
    drawn = draw_coefficients(model.n, rng)
    if coeffs is None:
        coeffs = drawn
    x = sample_ar1_normal(model.n, model.p, model.rho, rng)
    y = gen_response(model, x, coeffs, rng)
    design, blocks, names = build_design(model, x)
    data = Dataset(x=design, y=y, groups=blocks, feature_names=names)
    return data, true_active(model.model_id)


def min_model_size(ranking: Sequence[int], true_active: Sequence[int]) -> int:
    """Shortest ranking prefix that contains every active block."""
    if not true_active:
        return 0
    position = {b: i for i, b in enumerate(ranking)}
    worst = 0
    for a in true_active:
        if a not in position:
            raise MissingActiveBlock(a)
        worst = max(worst, position[a])
    return worst + 1


def quantiles(values: Sequence[float], probs: Sequence[float]) -> np.ndarray:
    """Empirical quantiles by linear interpolation of order statistics (type 7)."""
    v = np.asarray(values, dtype=np.float64)
    if v.size == 0:
        raise UsageError("quantiles of an empty sample")
    return np.quantile(v, np.asarray(probs, dtype=np.float64))


def default_cutoffs(n: int) -> Tuple[int, int, int]:
    return tuple(cutoff_d(n, m) for m in (1, 2, 3))


def check_compatible(model: ModelSpec, method: str) -> None:
    if method not in METHODS:
        raise IncompatibleMethod(f"unknown method {method!r}; expected one of {METHODS}")
    if method != "dcsis" and model.model_id in DCSIS_ONLY:
        raise IncompatibleMethod(
            f"{method} cannot run model {model.model_id} "
            "(grouped predictors or multivariate response); use dcsis"
        )
    if not true_active(model.model_id):
        raise IncompatibleMethod(f"model {model.model_id} has no active predictors to evaluate")


def evaluate(ranking: Sequence[int], active: Sequence[int], cutoffs: Sequence[int],
             rep_index: int = 0) -> ReplicationOutcome:
    position = {b: i for i, b in enumerate(ranking)}
    return ReplicationOutcome(
        rep_index=rep_index,
        ranking=tuple(ranking),
        true_active=tuple(active),
        min_model_size=min_model_size(ranking, active),
        selected_at={d: tuple(position[a] < d for a in active) for d in cutoffs},
    )


def _replication_task(task) -> List[Dict[str, ReplicationOutcome]]:
    model, methods, rep_indices, cutoffs = task
    out = []
    for rep in rep_indices:
        data, active = simulate_dataset(model, rep)
        by_method = {}
        for method in methods:
            utilities, _ = utilities_for(data, method, workers=1)
            ranked = rank_and_select(utilities, TopD(1))
            by_method[method] = evaluate(ranked.ranking, active, cutoffs, rep)
        out.append(by_method)
    return out


def run_comparison(model: ModelSpec, methods: Sequence[str], reps: int,
                   cutoffs: Optional[Sequence[int]] = None,
                   workers: int = 1) -> Dict[str, EvalReport]:
    """Run every method on the same ``reps`` replications of ``model``."""
    methods = list(dict.fromkeys(methods))
    if not methods:
        raise UsageError("at least one method is required")
    if reps < 1:
        raise UsageError(f"reps must be >= 1, got {reps}")
    for method in methods:
        check_compatible(model, method)
    cutoffs = tuple(int(d) for d in (cutoffs or default_cutoffs(model.n)))
    if any(d < 1 for d in cutoffs):
        raise UsageError(f"cutoffs must be positive, got {cutoffs}")

    logger.info("model %s: n=%d p=%d rho=%s reps=%d methods=%s cutoffs=%s",
                model.model_id, model.n, model.p, model.rho, reps, ",".join(methods), cutoffs)
    tasks = [(model, methods, tuple(chunk), cutoffs)
             for chunk in chunked(list(range(reps)), REPS_PER_TASK)]
    per_rep: List[Dict[str, ReplicationOutcome]] = []
    for part in map_ordered(_replication_task, tasks, workers):
        per_rep.extend(part)

    labels = [f"X{b}" for b in true_active(model.model_id)]
    return {
        method: EvalReport.from_outcomes(
            method, model, [r[method] for r in per_rep], cutoffs, labels)
        for method in methods
    }


def run_replications(model: ModelSpec, method: str, reps: int,
                     cutoffs: Optional[Sequence[int]] = None, workers: int = 1) -> EvalReport:
    return run_comparison(model, [method], reps, cutoffs, workers)[method]


@dataclass(frozen=True)
class Preset:
    name: str
    model: ModelSpec
    reps: int
    methods: Tuple[str, ...]


# case -> (rho, p at full scale); cases 3 and 4 are the p=5000 designs.
_CASES = {1: (0.5, 2000), 2: (0.8, 2000), 3: (0.5, 5000), 4: (0.8, 5000)}
_DESK = dict(n=200, p=500, reps=100)
_FULL = dict(n=200, reps=500)


def _build_presets() -> Dict[str, Preset]:
    presets = {}
    for model_id in MODELS:
        if model_id == "indep":
            continue
        methods = ("dcsis",) if model_id in DCSIS_ONLY else ("dcsis", "sis", "sirs")
        for case, (rho, p) in _CASES.items():
            scales = {"full": dict(_FULL, p=p)}
            if p == 2000:
                scales["desk"] = _DESK
            for scale, cfg in scales.items():
                name = f"{model_id}-case{case}-{scale}"
                presets[name] = Preset(
                    name=name,
                    model=ModelSpec(model_id, n=cfg["n"], p=cfg["p"], rho=rho),
                    reps=cfg["reps"],
                    methods=methods,
                )
    return presets


PRESETS = _build_presets()


def get_preset(name: str) -> Preset:
    """Look up a preset; a name without a scale suffix means desk, else full."""
    for key in (name, f"{name}-desk", f"{name}-full"):
        if key in PRESETS:
            return PRESETS[key]
    raise InvalidPreset(name, PRESETS)
