"""Distance-correlation sure independence screening (DC-SIS).

Ranks predictors, or blocks of predictors, by their squared sample distance
correlation with a possibly multivariate response, and ships the Pearson SIS
and SIRS baselines plus a Monte Carlo harness for comparing them.
"""

import logging

__version__ = "0.1.0"

logging.getLogger(__name__).addHandler(logging.NullHandler())

from .dataset import Dataset, FeatureBlock, load_csv, parse_group_spec, write_csv  # noqa: E402
from .dcov import DistanceStats, dcov2_sample  # noqa: E402
from .errors import DataError, DcScreenError, UsageError  # noqa: E402
from .screen import (  # noqa: E402
    ScreeningResult,
    Threshold,
    TopD,
    dcsis_utilities,
    rank_and_select,
    screen,
)

__all__ = [
    "__version__",
    "Dataset",
    "FeatureBlock",
    "load_csv",
    "parse_group_spec",
    "write_csv",
    "DistanceStats",
    "dcov2_sample",
    "DataError",
    "DcScreenError",
    "UsageError",
    "ScreeningResult",
    "Threshold",
    "TopD",
    "dcsis_utilities",
    "rank_and_select",
    "screen",
]
