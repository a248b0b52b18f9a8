"""Run configuration: defaults, environment, CLI flags and config files.

Precedence (lowest first): built-in defaults, ``DCSCREEN_WORKERS``, command
line flags, ``--config`` file.  A key given both as a flag and in the file
takes the file value and logs a warning.
"""

from __future__ import annotations

import json
import logging
import os
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Any, Mapping, Optional, Union

import yaml

from .errors import ConfigError
from .parallel import WORKERS_ENV

logger = logging.getLogger(__name__)

COMMANDS = ("screen", "simulate", "converge")

_INT_KEYS = {"n", "p", "reps", "seed", "workers", "seeds", "surrogate_n"}
_FLOAT_KEYS = {"c", "kappa", "rho"}
# Keys that only steer resolution and never come from a file.
_NOT_FROM_FILE = {"command", "config"}


@dataclass
class RunConfig:
    command: str
    config: Optional[str] = None
    # screen
    input: Optional[str] = None
    response_cols: str = "last"
    groups: Optional[str] = None
    rule: str = "top-d"
    d: Union[int, str] = "auto"
    c: Optional[float] = None
    kappa: Optional[float] = None
    # screen / simulate (comma list for simulate)
    method: Optional[str] = None
    # simulate / converge
    preset: Optional[str] = None
    model: Optional[str] = None
    n: Optional[int] = None
    p: Optional[int] = None
    rho: Optional[float] = None
    reps: Optional[int] = None
    cut_mode: Optional[str] = None
    grid: str = "50,100,200,400"
    seeds: int = 20
    surrogate_n: int = 20000
    # shared
    seed: int = 0
    workers: int = 1
    out_dir: str = "."

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}; expected one of {COMMANDS}")
        if self.workers < 1:
            raise ConfigError(f"workers must be >= 1, got {self.workers}")
        if self.seed < 0:
            raise ConfigError(f"seed must be a non-negative integer, got {self.seed}")
        if self.rule not in ("top-d", "threshold"):
            raise ConfigError(f"rule must be 'top-d' or 'threshold', got {self.rule!r}")

    def to_dict(self) -> dict:
        return asdict(self)

    def methods(self, fallback=("dcsis",)) -> tuple:
        if not self.method:
            return tuple(fallback)
        return tuple(m.strip() for m in self.method.split(",") if m.strip())


CONFIG_KEYS = frozenset(f.name for f in fields(RunConfig)) - _NOT_FROM_FILE


def normalize_key(key: str) -> str:
    return str(key).strip().replace("-", "_")


def _coerce(key: str, value: Any) -> Any:
    if value is None:
        return None
    try:
        if key in _INT_KEYS:
            if isinstance(value, float) and not value.is_integer():
                raise ValueError(value)
            return int(value)
        if key in _FLOAT_KEYS:
            return float(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{key} expects a number, got {value!r}") from None
    if key == "d":
        if str(value).strip().lower() == "auto":
            return "auto"
        try:
            return int(value)
        except (TypeError, ValueError):
            raise ConfigError(f"d expects a positive integer or 'auto', got {value!r}") from None
    if key == "method" and isinstance(value, (list, tuple)):
        return ",".join(str(v) for v in value)
    if key == "grid" and isinstance(value, (list, tuple)):
        return ",".join(str(int(v)) for v in value)
    if isinstance(value, (dict, list, tuple)):
        raise ConfigError(f"config key {key!r} must be a scalar value")
    return str(value)


def load_config_file(path) -> dict:
    """Read a flat YAML or JSON mapping and normalize its keys."""
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    text = path.read_text(encoding="utf-8")
    try:
        if path.suffix.lower() in (".yaml", ".yml"):
            raw = yaml.safe_load(text)
        elif path.suffix.lower() == ".json":
            raw = json.loads(text)
        else:
            raise ConfigError(f"config file must be .yaml, .yml or .json: {path}")
    except (yaml.YAMLError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot parse config file {path}: {exc}") from exc

    if raw is None:
        return {}
    if not isinstance(raw, Mapping):
        raise ConfigError(f"config file {path} must contain a key/value mapping")

    out = {}
    for key, value in raw.items():
        name = normalize_key(key)
        if name not in CONFIG_KEYS:
            raise ConfigError(f"unknown config key {key!r} in {path}")
        out[name] = _coerce(name, value)
    return out


def env_workers(environ: Optional[Mapping[str, str]] = None) -> Optional[int]:
    environ = os.environ if environ is None else environ
    raw = environ.get(WORKERS_ENV)
    if not raw:
        return None
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"{WORKERS_ENV} must be an integer, got {raw!r}") from None


def resolve_config(command: str, flags: Mapping[str, Any],
                   environ: Optional[Mapping[str, str]] = None) -> RunConfig:
    """Merge defaults, environment, ``flags`` and the optional config file."""
    values: dict = {}
    workers = env_workers(environ)
    if workers is not None:
        values["workers"] = workers

    given = {normalize_key(k): v for k, v in flags.items()}
    config_path = given.pop("config", None)
    given.pop("command", None)
    for key, value in given.items():
        if key not in CONFIG_KEYS:
            raise ConfigError(f"unknown option {key!r}")
        values[key] = _coerce(key, value)

    if config_path:
        from_file = load_config_file(config_path)
        for key, value in from_file.items():
            if key in given and values[key] != value:
                logger.warning("%s: config file value %r overrides flag value %r",
                               key, value, values[key])
            values[key] = value

    return RunConfig(command=command, config=config_path, **values)
