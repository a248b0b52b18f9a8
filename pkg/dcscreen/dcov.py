"""Sample distance covariance and distance correlation.

Both estimators use the moment identity dcov^2 = S1 + S2 - 2*S3 with the
plain V-statistic moments

    S1 = n^-2 sum_ij A_ij B_ij
    S2 = (n^-2 sum_ij A_ij) (n^-2 sum_ij B_ij)
    S3 = n^-3 sum_l (sum_i A_il) (sum_j B_jl)

where A and B are the Euclidean distance matrices of the two samples.  The
fast path evaluates S3 through row sums (O(n^2)) and walks the distance
matrices in row tiles so large n never materializes a full n x n matrix; the
naive path keeps the literal triple sum and exists as a testing oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np
from scipy.spatial.distance import cdist

from .errors import RowCountMismatch, TooFewSamples

# Marginal dcov^2 at or below this makes dcorr undefined.
EPS_VAR = 1e-14

# Distance-matrix elements held per tile; fixed so results never depend on
# how work is split across processes.
TILE_ELEMENTS = 4_000_000


@dataclass(frozen=True)
class DistanceStats:
    s1_hat: float
    s2_hat: float
    s3_hat: float
    dcov2_uv: float
    dcov2_uu: float
    dcov2_vv: float
    dcorr: Optional[float]

    @property
    def defined(self) -> bool:
        return self.dcorr is not None

    @property
    def utility(self) -> float:
        """Squared distance correlation; 0 when undefined."""
        if self.dcorr is None:
            return 0.0
        return self.dcorr * self.dcorr

    def to_dict(self) -> dict:
        return {
            "s1_hat": self.s1_hat,
            "s2_hat": self.s2_hat,
            "s3_hat": self.s3_hat,
            "dcov2_uv": self.dcov2_uv,
            "dcov2_uu": self.dcov2_uu,
            "dcov2_vv": self.dcov2_vv,
            "dcorr": self.dcorr,
        }


def as_sample(a) -> np.ndarray:
    """View a vector or matrix as an n x d float64 sample."""
    a = np.asarray(a, dtype=np.float64)
    if a.ndim == 1:
        return a.reshape(-1, 1)
    if a.ndim != 2:
        raise ValueError(f"expected a vector or matrix, got shape {a.shape}")
    return a


def _check_pair(u: np.ndarray, v: np.ndarray) -> int:
    if u.shape[0] != v.shape[0]:
        raise RowCountMismatch(u.shape[0], v.shape[0])
    if u.shape[0] < 2:
        raise TooFewSamples(u.shape[0])
    return u.shape[0]


def pairwise_distances(sample) -> np.ndarray:
    """Symmetric n x n matrix of Euclidean distances between rows."""
    s = as_sample(sample)
    return cdist(s, s, "euclidean")


def tile_rows(n: int) -> int:
    return max(1, min(n, TILE_ELEMENTS // max(n, 1)))


def finalize(n: int, sum_a, rows_a, sum_aa, sum_ab, sum_b, rows_b, sum_bb) -> DistanceStats:
    """Turn accumulated sums of two distance matrices into ``DistanceStats``."""
    n2 = float(n) * n
    n3 = n2 * n
    mean_a = sum_a / n2
    mean_b = sum_b / n2
    s1 = sum_ab / n2
    s2 = mean_a * mean_b
    s3 = float(np.dot(rows_a, rows_b)) / n3
    dcov2_uv = s1 + s2 - 2.0 * s3
    dcov2_uu = max(sum_aa / n2 + mean_a * mean_a - 2.0 * float(np.dot(rows_a, rows_a)) / n3, 0.0)
    dcov2_vv = max(sum_bb / n2 + mean_b * mean_b - 2.0 * float(np.dot(rows_b, rows_b)) / n3, 0.0)
    return DistanceStats(
        s1_hat=float(s1),
        s2_hat=float(s2),
        s3_hat=float(s3),
        dcov2_uv=float(dcov2_uv),
        dcov2_uu=float(dcov2_uu),
        dcov2_vv=float(dcov2_vv),
        dcorr=dcorr_from(dcov2_uv, dcov2_uu, dcov2_vv),
    )


def dcorr_from(dcov2_uv: float, dcov2_uu: float, dcov2_vv: float) -> Optional[float]:
    """dcov / sqrt(dcov_uu * dcov_vv), or None for a degenerate marginal."""
    if dcov2_uu <= EPS_VAR or dcov2_vv <= EPS_VAR:
        return None
    ratio = max(dcov2_uv, 0.0) / math.sqrt(dcov2_uu * dcov2_vv)
    return math.sqrt(ratio)


class ResponseDistances:
    """Distance moments of one sample, shared by every block screened against it.

    When the whole matrix fits in a single tile it is computed once and kept;
    otherwise each tile is recomputed on demand.
    """

    def __init__(self, sample):
        self.sample = np.ascontiguousarray(as_sample(sample))
        self.n = self.sample.shape[0]
        if self.n < 2:
            raise TooFewSamples(self.n)
        self.rows_per_tile = tile_rows(self.n)
        self._full = None
        if self.rows_per_tile >= self.n:
            self._full = pairwise_distances(self.sample)

        rows = np.empty(self.n)
        total = 0.0
        squares = 0.0
        for start, tile in self.tiles():
            rows[start:start + tile.shape[0]] = tile.sum(axis=1)
            total += float(tile.sum())
            squares += float(np.vdot(tile, tile))
        self.row_sums = rows
        self.total = total
        self.sum_squares = squares

    def tiles(self):
        """Yield ``(start_row, tile)`` covering the distance matrix top to bottom."""
        step = self.rows_per_tile
        for start in range(0, self.n, step):
            stop = min(start + step, self.n)
            if self._full is not None:
                yield start, self._full[start:stop]
            else:
                yield start, cdist(self.sample[start:stop], self.sample, "euclidean")

    def stats_against(self, blocks: Sequence[np.ndarray]) -> List[DistanceStats]:
        """``DistanceStats`` of every block (each n x d_k) against this sample."""
        blocks = [np.ascontiguousarray(as_sample(b)) for b in blocks]
        for b in blocks:
            _check_pair(b, self.sample)
        k = len(blocks)
        rows_a = np.zeros((k, self.n))
        sum_a = np.zeros(k)
        sum_aa = np.zeros(k)
        sum_ab = np.zeros(k)
        for start, b_tile in self.tiles():
            stop = start + b_tile.shape[0]
            for i, block in enumerate(blocks):
                a_tile = cdist(block[start:stop], block, "euclidean")
                rows_a[i, start:stop] = a_tile.sum(axis=1)
                sum_a[i] += a_tile.sum()
                sum_aa[i] += np.vdot(a_tile, a_tile)
                sum_ab[i] += np.vdot(a_tile, b_tile)
        return [
            finalize(
                self.n,
                float(sum_a[i]),
                rows_a[i],
                float(sum_aa[i]),
                float(sum_ab[i]),
                self.total,
                self.row_sums,
                self.sum_squares,
            )
            for i in range(k)
        ]


def dcov2_sample(u, v) -> DistanceStats:
    """Fast O(n^2) distance statistics of the pair (u, v)."""
    u = as_sample(u)
    v = as_sample(v)
    _check_pair(u, v)
    return ResponseDistances(v).stats_against([u])[0]


def dcov2_sample_naive(u, v) -> DistanceStats:
    """Literal double/triple sums using O(n^3) memory; meant for n <= ~200."""
    u = as_sample(u)
    v = as_sample(v)
    n = _check_pair(u, v)

    def distances(s):
        diff = s[:, None, :] - s[None, :, :]
        return np.sqrt((diff * diff).sum(axis=-1))

    def moments(a, b):
        s1 = (a * b).sum() / n**2
        s2 = (a.sum() / n**2) * (b.sum() / n**2)
        # a[i, l] * b[j, l] summed over i, j, l.
        s3 = (a[:, None, :] * b[None, :, :]).sum() / n**3
        return float(s1), float(s2), float(s3)

    a = distances(u)
    b = distances(v)
    s1, s2, s3 = moments(a, b)
    uu = moments(a, a)
    vv = moments(b, b)
    dcov2_uv = s1 + s2 - 2.0 * s3
    dcov2_uu = max(uu[0] + uu[1] - 2.0 * uu[2], 0.0)
    dcov2_vv = max(vv[0] + vv[1] - 2.0 * vv[2], 0.0)
    return DistanceStats(
        s1_hat=s1,
        s2_hat=s2,
        s3_hat=s3,
        dcov2_uv=dcov2_uv,
        dcov2_uu=dcov2_uu,
        dcov2_vv=dcov2_vv,
        dcorr=dcorr_from(dcov2_uv, dcov2_uu, dcov2_vv),
    )
