"""Command-line entry point: ``dcscreen {screen,simulate,converge}``.

Exit codes: 0 success, 1 data error, 2 usage error (argparse included).
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path
from typing import List, Optional, Sequence

import pandas as pd

from . import __version__
from .config import RunConfig, resolve_config
from .converge import convergence_diagnostic
from .dataset import format_group_spec, load_csv
from .errors import ConfigError, DcScreenError, InvalidRule, UsageError
from .log import configure_logging
from .report import (
    dump_json,
    eval_markdown,
    selection_payload,
    simulation_payload,
    write_eval_csv,
    write_utilities_csv,
)
from .screen import METHODS, Threshold, TopD, cutoff_d, screen
from .simulate import CUT_MODES, MODELS, ModelSpec, get_preset, run_comparison

logger = logging.getLogger(__name__)


def build_parser() -> argparse.ArgumentParser:
    # SUPPRESS keeps unset flags out of the namespace so the config merge
    # can tell "given" from "defaulted".
    common = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    common.add_argument("--seed", type=int, help="master seed (default 0)")
    common.add_argument("--workers", type=int,
                        help="worker processes (default $DCSCREEN_WORKERS or 1)")
    common.add_argument("--out-dir", help="directory for output files (default .)")
    common.add_argument("--config", help="flat YAML or JSON file; its values win over flags")
    common.add_argument("-v", "--verbose", action="count",
                        help="-v for progress, -vv for debug output")

    parser = argparse.ArgumentParser(
        prog="dcscreen",
        description="Distance-correlation sure independence screening.",
        argument_default=argparse.SUPPRESS,
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_screen = sub.add_parser("screen", parents=[common], argument_default=argparse.SUPPRESS,
                              help="rank and select predictors of a CSV dataset")
    p_screen.add_argument("--input", help="CSV file with one header row")
    p_screen.add_argument("--response-cols",
                          help="response columns: names, 1-based indices/ranges, or 'last'")
    p_screen.add_argument("--groups", help="predictor blocks, e.g. '1-3;4;7-9'")
    p_screen.add_argument("--method", choices=METHODS, help="screening utility (default dcsis)")
    p_screen.add_argument("--rule", choices=("top-d", "threshold"), help="selection rule")
    p_screen.add_argument("--d", help="top-d size or 'auto' for floor(n / ln n)")
    p_screen.add_argument("--c", type=float, help="threshold constant c")
    p_screen.add_argument("--kappa", type=float, help="threshold exponent kappa in [0, 0.5)")

    p_sim = sub.add_parser("simulate", parents=[common], argument_default=argparse.SUPPRESS,
                           help="run a Monte Carlo screening experiment")
    p_sim.add_argument("--preset", help="e.g. 1a-case1-desk, 2-case1, 3b-case2-full")
    p_sim.add_argument("--model", choices=[m for m in MODELS if m != "indep"])
    p_sim.add_argument("--method", help="comma-separated methods (default: the preset's)")
    p_sim.add_argument("--n", type=int)
    p_sim.add_argument("--p", type=int)
    p_sim.add_argument("--rho", type=float)
    p_sim.add_argument("--reps", type=int)
    p_sim.add_argument("--cut-mode", choices=CUT_MODES, help="model 2 cut points")

    p_conv = sub.add_parser("converge", parents=[common], argument_default=argparse.SUPPRESS,
                            help="max-error decay of the utilities over a sample-size grid")
    p_conv.add_argument("--model", choices=MODELS, help="default 1a")
    p_conv.add_argument("--p", type=int, help="default 50")
    p_conv.add_argument("--rho", type=float, help="default 0.5")
    p_conv.add_argument("--grid", help="comma-separated sample sizes (default 50,100,200,400)")
    p_conv.add_argument("--seeds", type=int, help="datasets per grid point (default 20)")
    p_conv.add_argument("--surrogate-n", type=int, help="surrogate sample size (default 20000)")
    return parser


def prepare_out_dir(config: RunConfig) -> Path:
    out = Path(config.out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ConfigError(f"cannot create output directory {out}: {exc}") from exc
    if not out.is_dir():
        raise ConfigError(f"output path is not a directory: {out}")
    return out


def write_manifest(config: RunConfig, out: Path, outputs: Sequence[str]) -> None:
    dump_json({
        "tool": "dcscreen",
        "version": __version__,
        "command": config.command,
        "seed": config.seed,
        "config": config.to_dict(),
        "outputs": list(outputs),
    }, out / "manifest.json")


def selection_rule(config: RunConfig, n: int, n_blocks: int):
    if config.rule == "threshold":
        if config.c is None or config.kappa is None:
            raise InvalidRule("the threshold rule needs both --c and --kappa")
        return Threshold(config.c, config.kappa)
    if config.d == "auto":
        d = cutoff_d(n) if n >= 3 else 1
        if d > n_blocks:
            logger.warning("automatic d=%d exceeds G=%d; selecting all blocks", d, n_blocks)
            d = n_blocks
        return TopD(d)
    return TopD(int(config.d))


def cmd_screen(config: RunConfig) -> int:
    if not config.input:
        raise UsageError("screen needs --input")
    method = config.method or "dcsis"
    if method not in METHODS:
        raise UsageError(f"unknown method {method!r}; expected one of {', '.join(METHODS)}")
    out = prepare_out_dir(config)

    data = load_csv(config.input, config.response_cols, config.groups)
    rule = selection_rule(config, data.n, data.n_blocks)
    result = screen(data, method, rule, workers=config.workers)

    write_utilities_csv(data, result, out / "utilities.csv")
    payload = selection_payload(data, result)
    payload["groups"] = format_group_spec(data.groups)
    dump_json(payload, out / "selected.json")
    write_manifest(config, out, ["utilities.csv", "selected.json"])

    print(f"{method}: n={data.n} G={data.n_blocks}, selected {len(result.selected)} block(s)")
    for b in result.selected[:10]:
        print(f"  {data.block_label(b)}\t{result.utilities[b - 1]:.6f}")
    if len(result.selected) > 10:
        print(f"  ... {len(result.selected) - 10} more in {out / 'selected.json'}")
    return 0


def simulation_model(config: RunConfig):
    """The ModelSpec, reps and methods a simulate run resolves to."""
    if config.preset:
        preset = get_preset(config.preset)
        model, reps, methods = preset.model, preset.reps, preset.methods
    elif config.model:
        model, reps, methods = ModelSpec(config.model), 100, ("dcsis",)
    else:
        raise UsageError("simulate needs --preset or --model")

    overrides = {k: getattr(config, k) for k in ("n", "p", "rho", "cut_mode")
                 if getattr(config, k) is not None}
    model = replace(model, seed=config.seed, **overrides)
    if config.reps is not None:
        reps = config.reps
    return model, reps, config.methods(fallback=methods)


def cmd_simulate(config: RunConfig) -> int:
    model, reps, methods = simulation_model(config)
    out = prepare_out_dir(config)

    reports = run_comparison(model, methods, reps, workers=config.workers)

    dump_json(simulation_payload(model, reports, config.preset), out / "report.json")
    write_eval_csv(reports, out / "report.csv")
    write_manifest(config, out, ["report.json", "report.csv"])
    print(eval_markdown(reports))
    return 0


def cmd_converge(config: RunConfig) -> int:
    out = prepare_out_dir(config)
    report = convergence_diagnostic(
        model_id=config.model or "1a",
        p=config.p if config.p is not None else 50,
        rho=config.rho if config.rho is not None else 0.5,
        grid=config.grid,
        seeds=config.seeds,
        surrogate_n=config.surrogate_n,
        master_seed=config.seed,
        workers=config.workers,
    )

    table = pd.DataFrame(report.to_dict()["rows"])
    table.to_csv(out / "converge.csv", index=False, float_format="%.6g")
    dump_json(report.to_dict(), out / "converge.json")
    write_manifest(config, out, ["converge.csv", "converge.json"])

    print(table.to_string(index=False))
    trend = "strictly decreasing" if report.strictly_decreasing() else "NOT strictly decreasing"
    print(f"median max-error is {trend} over n = {', '.join(str(n) for n in report.grid)}")
    return 0


COMMAND_HANDLERS = {
    "screen": cmd_screen,
    "simulate": cmd_simulate,
    "converge": cmd_converge,
}


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = vars(parser.parse_args(argv))
    command = args.pop("command")
    configure_logging(args.pop("verbose", 0))

    try:
        config = resolve_config(command, args)
        return COMMAND_HANDLERS[command](config)
    except DcScreenError as exc:
        print(f"dcscreen: error: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
