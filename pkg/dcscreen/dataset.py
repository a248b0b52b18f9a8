"""In-memory data representation, feature grouping and CSV ingestion.

A ``Dataset`` holds an n x p predictor matrix (column-major, so per-feature
screening reads contiguous memory), an n x q response matrix and an ordered
partition of the predictor columns into feature blocks.  Block ids are
1-based; column positions inside a ``FeatureBlock`` are 0-based array indices.
"""

from __future__ import annotations

import csv
import logging
import re
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from .errors import (
    ColumnSpecError,
    DataError,
    EmptyPredictorSet,
    GroupSpecError,
    MissingFileError,
    NonNumericCell,
    RaggedRowsError,
    RowCountMismatch,
    TooFewSamples,
)

logger = logging.getLogger(__name__)

RANGE_RE = re.compile(r"^\s*(\d+)\s*(?:-\s*(\d+)\s*)?$")


@dataclass(frozen=True)
class FeatureBlock:
    block_id: int
    columns: Tuple[int, ...]

    def __post_init__(self):
        if not self.columns:
            raise GroupSpecError(f"block {self.block_id} is empty")
        if any(b <= a for a, b in zip(self.columns, self.columns[1:])):
            raise GroupSpecError(f"block {self.block_id} columns must be strictly increasing")

    @property
    def width(self) -> int:
        return len(self.columns)


def singleton_blocks(p: int) -> Tuple[FeatureBlock, ...]:
    return tuple(FeatureBlock(k + 1, (k,)) for k in range(p))


def parse_group_spec(spec: Optional[str], p: int) -> Tuple[FeatureBlock, ...]:
    """Parse a grouping such as ``"1-3;4;7"`` over 1-based predictor columns.

    Columns not mentioned become singleton blocks.  Blocks are ordered by their
    first column and numbered 1..G in that order.
    """
    if spec is None or not spec.strip():
        return singleton_blocks(p)

    owner = {}
    groups = []
    for token in spec.split(";"):
        if not token.strip():
            continue
        m = RANGE_RE.match(token)
        if not m:
            raise GroupSpecError(f"cannot parse group {token!r} in {spec!r}")
        lo = int(m.group(1))
        hi = int(m.group(2)) if m.group(2) else lo
        if lo < 1 or hi > p:
            raise GroupSpecError(f"group {token.strip()!r} is outside columns 1..{p}")
        if hi < lo:
            raise GroupSpecError(f"group {token.strip()!r} is reversed")
        cols = list(range(lo - 1, hi))
        for c in cols:
            if c in owner:
                raise GroupSpecError(f"column {c + 1} appears in more than one group")
            owner[c] = len(groups)
        groups.append(cols)

    for c in range(p):
        if c not in owner:
            groups.append([c])

    groups.sort(key=lambda cols: cols[0])
    return tuple(FeatureBlock(i + 1, tuple(cols)) for i, cols in enumerate(groups))


def format_group_spec(groups: Sequence[FeatureBlock]) -> str:
    """Inverse of ``parse_group_spec`` for recording groupings in outputs."""
    parts = []
    for block in groups:
        lo, hi = block.columns[0] + 1, block.columns[-1] + 1
        parts.append(str(lo) if lo == hi else f"{lo}-{hi}")
    return ";".join(parts)


def _readonly(a: np.ndarray, order: str) -> np.ndarray:
    out = np.array(a, dtype=np.float64, order=order, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class Dataset:
    """Validated, immutable screening input."""

    x: np.ndarray
    y: np.ndarray
    groups: Tuple[FeatureBlock, ...] = ()
    feature_names: Optional[Tuple[str, ...]] = None
    predictor_names: Optional[Tuple[str, ...]] = None
    response_names: Optional[Tuple[str, ...]] = None
    zero_variance: Tuple[int, ...] = field(default=())

    def __post_init__(self):
        x = np.asarray(self.x, dtype=np.float64)
        y = np.asarray(self.y, dtype=np.float64)
        if x.ndim == 1:
            x = x.reshape(-1, 1)
        if y.ndim == 1:
            y = y.reshape(-1, 1)
        if x.ndim != 2 or y.ndim != 2:
            raise ValueError("x and y must be 2-d matrices")
        if x.shape[0] != y.shape[0]:
            raise RowCountMismatch(x.shape[0], y.shape[0])
        if x.shape[0] < 2:
            raise TooFewSamples(x.shape[0])
        if x.shape[1] < 1:
            raise EmptyPredictorSet()
        if y.shape[1] < 1:
            raise ValueError("at least one response column is required")
        for name, a in (("x", x), ("y", y)):
            bad = np.argwhere(~np.isfinite(a))
            if bad.size:
                row, col = bad[0]
                raise NonNumericCell(int(row) + 1, f"{name}[{int(col) + 1}]", str(a[row, col]))

        p = x.shape[1]
        groups = tuple(self.groups) if self.groups else singleton_blocks(p)
        seen = sorted(c for block in groups for c in block.columns)
        if seen != list(range(p)):
            raise GroupSpecError("groups must cover every predictor column exactly once")
        if [b.block_id for b in groups] != list(range(1, len(groups) + 1)):
            raise GroupSpecError("block ids must be 1..G in order")

        for attr, expected in (
            ("feature_names", len(groups)),
            ("predictor_names", p),
            ("response_names", y.shape[1]),
        ):
            names = getattr(self, attr)
            if names is not None:
                names = tuple(str(s) for s in names)
                if len(names) != expected:
                    raise ValueError(f"{attr} needs {expected} labels, got {len(names)}")
                object.__setattr__(self, attr, names)

        object.__setattr__(self, "x", _readonly(x, "F"))
        object.__setattr__(self, "y", _readonly(y, "F"))
        object.__setattr__(self, "groups", groups)
        object.__setattr__(self, "zero_variance", tuple(int(c) for c in self.zero_variance))

    @property
    def n(self) -> int:
        return self.x.shape[0]

    @property
    def p(self) -> int:
        return self.x.shape[1]

    @property
    def q(self) -> int:
        return self.y.shape[1]

    @property
    def n_blocks(self) -> int:
        return len(self.groups)

    @property
    def is_grouped(self) -> bool:
        return any(b.width > 1 for b in self.groups)

    def block(self, block_id: int) -> np.ndarray:
        """The n x width sub-matrix of one feature block."""
        cols = self.groups[block_id - 1].columns
        if len(cols) == 1:
            return self.x[:, cols[0]:cols[0] + 1]
        return self.x[:, list(cols)]

    def block_label(self, block_id: int) -> str:
        if self.feature_names is not None:
            return self.feature_names[block_id - 1]
        cols = self.groups[block_id - 1].columns
        if self.predictor_names is not None:
            return "+".join(self.predictor_names[c] for c in cols)
        return f"X{block_id}"

    def with_groups(self, groups: Sequence[FeatureBlock], feature_names=None) -> "Dataset":
        # Only the partition changes; values are shared.
        return replace(self, groups=tuple(groups), feature_names=feature_names)


def _parse_column_spec(spec, header: Sequence[str]) -> list:
    """Resolve ``--response-cols``: names, 1-based indices, ranges or ``last``."""
    if spec is None:
        raise ColumnSpecError("response columns must be given")
    if isinstance(spec, (list, tuple)):
        tokens = [str(t) for t in spec]
    else:
        tokens = [t for t in str(spec).split(",")]
    cols = []
    for raw in tokens:
        token = raw.strip()
        if not token:
            continue
        if token in header:
            cols.append(header.index(token))
        elif token == "last":
            cols.append(len(header) - 1)
        else:
            m = RANGE_RE.match(token)
            if not m:
                raise ColumnSpecError(f"unknown response column {token!r}")
            lo = int(m.group(1))
            hi = int(m.group(2)) if m.group(2) else lo
            if lo < 1 or hi > len(header) or hi < lo:
                raise ColumnSpecError(
                    f"response column range {token!r} is outside 1..{len(header)}")
            cols.extend(range(lo - 1, hi))
    if not cols:
        raise ColumnSpecError("response column spec selects nothing")
    if len(set(cols)) != len(cols):
        raise ColumnSpecError("response columns listed more than once")
    return sorted(cols)


def check_field_counts(path: Path) -> None:
    """Reject a file whose data rows do not all have as many fields as the header.

    Blank lines are skipped, matching how the rows are numbered in errors.
    """
    with open(path, newline="", encoding="utf-8") as f:
        rows = (r for r in csv.reader(f) if r)
        header = next(rows, None)
        if header is None:
            return
        for i, fields in enumerate(rows, start=1):
            if len(fields) != len(header):
                raise RaggedRowsError(i, len(header), len(fields))


def load_csv(path, response_cols="last", group_spec: Optional[str] = None) -> Dataset:
    """Read a comma-separated file with one header row into a ``Dataset``.

    Any cell that is not a finite decimal float rejects the whole file.
    """
    path = Path(path)
    if not path.is_file():
        raise MissingFileError(path)

    check_field_counts(path)
    try:
        raw = pd.read_csv(
            path,
            dtype=str,
            na_filter=False,
            skipinitialspace=True,
            encoding="utf-8",
        )
    except pd.errors.ParserError as e:
        raise DataError(f"cannot parse {path}: {e}") from e
    except pd.errors.EmptyDataError as e:
        raise TooFewSamples(0) from e

    header = [str(c) for c in raw.columns]

    values = np.empty(raw.shape, dtype=np.float64)
    for j, name in enumerate(header):
        cells = raw[name].str.strip()
        try:
            # float() per cell; exact for round-trip output.
            col = cells.to_numpy(dtype=np.float64)
        except ValueError:
            col = pd.to_numeric(cells, errors="coerce").to_numpy(dtype=np.float64)
        bad = np.flatnonzero(~np.isfinite(col))
        if bad.size:
            i = int(bad[0])
            raise NonNumericCell(i + 1, name, raw[name].iloc[i])
        values[:, j] = col

    if values.shape[0] < 2:
        raise TooFewSamples(values.shape[0])

    resp = _parse_column_spec(response_cols, header)
    pred = [j for j in range(len(header)) if j not in resp]
    if not pred:
        raise EmptyPredictorSet()

    groups = parse_group_spec(group_spec, len(pred))
    predictor_names = tuple(header[j] for j in pred)
    data = Dataset(
        x=values[:, pred],
        y=values[:, resp],
        groups=groups,
        predictor_names=predictor_names,
        response_names=tuple(header[j] for j in resp),
    )
    feature_names = tuple(data.block_label(b.block_id) for b in groups)
    data = data.with_groups(groups, feature_names)
    logger.info("loaded %s: n=%d p=%d q=%d G=%d", path, data.n, data.p, data.q, data.n_blocks)
    return data


def write_csv(data: Dataset, path) -> None:
    """Write predictors then responses with round-trip float precision."""
    x_names = data.predictor_names or tuple(f"X{k + 1}" for k in range(data.p))
    y_names = data.response_names or tuple(
        "Y" if data.q == 1 else f"Y{k + 1}" for k in range(data.q)
    )
    frame = pd.DataFrame(
        np.hstack([data.x, data.y]),
        columns=list(x_names) + list(y_names),
    )
    frame.to_csv(path, index=False, float_format="%.17g")


def standardize_columns(data: Dataset) -> Dataset:
    """Center every predictor column and scale it to unit sample sd (n-1).

    Constant columns are set to exact zeros and listed in ``zero_variance``.
    """
    x = np.array(data.x, dtype=np.float64, order="F")
    constant = np.ptp(x, axis=0) == 0
    x -= x.mean(axis=0)
    x[:, constant] = 0.0
    sd = x.std(axis=0, ddof=1)
    scale = np.where(constant, 1.0, sd)
    x /= scale
    flagged = tuple(int(c) for c in np.flatnonzero(constant))
    if flagged:
        logger.debug("standardize: %d zero-variance columns", len(flagged))
    return replace(data, x=x, zero_variance=flagged)
