"""Exception hierarchy for dcscreen.

Library code raises these; only ``dcscreen.cli.main`` turns them into exit
codes (``DataError`` -> 1, ``UsageError`` -> 2).
"""

from __future__ import annotations

from typing import Iterable


class DcScreenError(Exception):
    """Base class for every error raised deliberately by dcscreen."""

    exit_code = 1


class DataError(DcScreenError):
    """Input data is missing, malformed, or incompatible with the method."""

    exit_code = 1


class UsageError(DcScreenError):
    """The caller asked for something that cannot be configured that way."""

    exit_code = 2


class MissingFileError(DataError, FileNotFoundError):
    def __init__(self, path):
        super().__init__(f"input file not found: {path}")
        self.path = path


class RaggedRowsError(DataError, ValueError):
    def __init__(self, row: int, expected: int, found: int | None = None):
        detail = f", found {found}" if found is not None else ""
        super().__init__(f"row {row} has the wrong number of fields (expected {expected}{detail})")
        self.row = row
        self.expected = expected
        self.found = found


class NonNumericCell(DataError, ValueError):
    """A cell could not be parsed as a finite 64-bit float.

    ``row`` is the 1-based data row (header excluded), ``col`` the column name.
    """

    def __init__(self, row: int, col: str, value: str = ""):
        super().__init__(f"non-numeric cell at row {row}, column {col!r}: {value!r}")
        self.row = row
        self.col = col
        self.value = value


class EmptyPredictorSet(DataError, ValueError):
    def __init__(self):
        super().__init__("no predictor columns remain after selecting the responses")


class TooFewSamples(DataError, ValueError):
    def __init__(self, n: int, minimum: int = 2):
        super().__init__(f"need at least {minimum} samples, got {n}")
        self.n = n
        self.minimum = minimum


class RowCountMismatch(DataError, ValueError):
    def __init__(self, n_x: int, n_y: int):
        super().__init__(f"row count mismatch: {n_x} predictor rows vs {n_y} response rows")
        self.n_x = n_x
        self.n_y = n_y


class GroupSpecError(DataError, ValueError):
    pass


class ColumnSpecError(DataError, ValueError):
    pass


class UnsupportedResponse(DataError):
    def __init__(self, method: str, q: int):
        super().__init__(f"{method} requires a univariate response, got q={q}")
        self.method = method
        self.q = q


class UnsupportedGrouping(DataError):
    def __init__(self, method: str, block_ids: Iterable[int]):
        ids = list(block_ids)
        shown = ", ".join(str(b) for b in ids[:5])
        super().__init__(f"{method} cannot screen grouped blocks (block ids: {shown})")
        self.method = method
        self.block_ids = ids


class IncompatibleMethod(DataError):
    pass


class MissingActiveBlock(DataError, ValueError):
    def __init__(self, block_id: int):
        super().__init__(f"active block {block_id} is absent from the ranking")
        self.block_id = block_id


class InvalidRule(UsageError, ValueError):
    pass


class InvalidPreset(UsageError, KeyError):
    def __init__(self, name: str, valid: Iterable[str]):
        self.name = name
        self.valid = sorted(valid)
        super().__init__(name)

    def __str__(self) -> str:
        return f"unknown preset {self.name!r}; valid presets: {', '.join(self.valid)}"


class ConfigError(UsageError, ValueError):
    pass


class GridTooSmall(UsageError, ValueError):
    def __init__(self, grid):
        super().__init__(f"convergence grid needs at least 2 sample sizes, got {list(grid)}")
        self.grid = list(grid)
