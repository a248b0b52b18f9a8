#!/usr/bin/env python3
"""Compare a simulation report against a baseline.

Usage:
    ./compare_reports.py current/report.json                       # vs bundled anchors
    ./compare_reports.py baseline/report.json current/report.json  # two reports
    ./compare_reports.py ... --fail-on-regression                  # exit 1 on Pa drops
    ./compare_reports.py desk/report.json --anchor-p 2000          # desk run vs p=2000

Baselines are either a ``report.json`` written by ``dcscreen simulate`` or the
YAML anchor file (``benchmarks/reference_anchors.yaml``), whose entries are
keyed by covariance case (rho, p) and then model -> method.  A report is only
compared with the anchor case matching its own rho and p.
"""

import argparse
import json
import math
import sys
from pathlib import Path
from typing import Dict, Optional, Tuple

import yaml

# ANSI colors
RED = '\033[0;31m'
GREEN = '\033[0;32m'
YELLOW = '\033[1;33m'
BLUE = '\033[0;34m'
NC = '\033[0m'

# Absolute drop in a selection proportion that counts as a regression
REGRESSION_THRESHOLD = 0.05

DEFAULT_ANCHORS = Path(__file__).resolve().parent.parent / "benchmarks" / "reference_anchors.yaml"

Metrics = Dict[Tuple[str, str], dict]
Case = Tuple[float, int]


def load_document(path: Path) -> dict:
    """Load a JSON or YAML file by suffix."""
    with open(path) as f:
        if path.suffix.lower() in (".yaml", ".yml"):
            return yaml.safe_load(f) or {}
        return json.load(f)


def extract_metrics(data: dict) -> Metrics:
    """Normalize a report or anchor file to (model, method) -> {pa, median_s}."""
    metrics: Metrics = {}

    # Format 1: report.json from ``dcscreen simulate``
    if "reports" in data:
        for method, report in data["reports"].items():
            key = (str(report["model_id"]), str(method))
            metrics[key] = {
                "pa": dict(report.get("pa_table", {})),
                "median_s": report.get("s_quantiles", {}).get("50%"),
            }

    # Format 2: one anchor case, keyed model -> method
    elif "anchors" in data:
        for model_id, by_method in data["anchors"].items():
            for method, values in by_method.items():
                metrics[(str(model_id), str(method))] = {
                    "pa": {str(k): float(v) for k, v in (values.get("pa") or {}).items()},
                    "median_s": values.get("median_s"),
                }

    return metrics


def case_of(data: dict) -> Optional[Case]:
    """(rho, p) of a report, or None when the document is not a report."""
    model = data.get("model") or {}
    if "rho" not in model or "p" not in model:
        return None
    return float(model["rho"]), int(model["p"])


def find_anchor_case(data: dict, rho: float, p: int) -> Optional[dict]:
    """The entry of an anchor file matching (rho, p), if there is one."""
    for entry in data.get("cases", []):
        if math.isclose(float(entry["rho"]), rho) and int(entry["p"]) == p:
            return entry
    return None


def is_anchor_file(data: dict) -> bool:
    return "cases" in data


def classify(delta: float, threshold: float) -> Tuple[str, str]:
    if delta < -threshold:
        return "REGRESSION", RED
    if delta > threshold:
        return "IMPROVED", GREEN
    return "OK", NC


def compare_reports(baseline_file: Path, current_file: Path,
                    threshold: float = REGRESSION_THRESHOLD,
                    fail_on_regression: bool = False,
                    anchor_p: Optional[int] = None) -> int:
    """Compare two report files and print a report; returns the exit code.

    ``anchor_p`` replaces the report's p when looking up an anchor case.
    """
    baseline_doc = load_document(baseline_file)
    current_doc = load_document(current_file)
    current = extract_metrics(current_doc)
    case = case_of(current_doc)

    if is_anchor_file(baseline_doc):
        entry = None
        if case is not None:
            rho, p = case[0], anchor_p if anchor_p is not None else case[1]
            entry = find_anchor_case(baseline_doc, rho, p)
        if entry is None:
            shown = f"rho={case[0]:g}, p={anchor_p or case[1]}" if case else "unknown case"
            print(f"{YELLOW}NO ANCHOR for {shown} in {baseline_file}{NC}")
            return 0
        models = {model_id for model_id, _ in current}
        baseline = {key: value for key, value in extract_metrics(entry).items()
                    if key[0] in models}
    else:
        baseline = extract_metrics(baseline_doc)
        base_case = case_of(baseline_doc)
        if case is not None and base_case is not None and base_case != case:
            print(f"{YELLOW}Warning: baseline case rho={base_case[0]:g}, p={base_case[1]} "
                  f"differs from current rho={case[0]:g}, p={case[1]}{NC}")

    print(f"{BLUE}========================================")
    print("Screening Report Comparison")
    print(f"========================================{NC}")
    print()
    print(f"Baseline: {baseline_file}")
    print(f"Current:  {current_file}")
    if is_anchor_file(baseline_doc):
        print(f"Anchor case: {entry['case']} (rho={entry['rho']:g}, p={entry['p']})")
    print(f"Pa regression threshold: {threshold:.2f}")
    print()

    regressions = 0
    improvements = 0
    unchanged = 0
    missing = 0

    for key in sorted(baseline):
        model_id, method = key
        print(f"{BLUE}model {model_id} / {method}:{NC}")
        base = baseline[key]
        curr = current.get(key)
        if curr is None:
            missing += 1
            print(f"  {'(all)':10s}  {YELLOW}MISSING{NC}")
            print()
            continue

        for label in sorted(base["pa"]):
            if label not in curr["pa"]:
                missing += 1
                print(f"  Pa({label}){'':4s}  {YELLOW}NO DATA{NC}")
                continue
            b, c = float(base["pa"][label]), float(curr["pa"][label])
            status, color = classify(c - b, threshold)
            if status == "REGRESSION":
                regressions += 1
            elif status == "IMPROVED":
                improvements += 1
            else:
                unchanged += 1
            print(f"  Pa({label}){'':4s}  {b:6.2f} -> {c:<6.2f}  ({c - b:+.2f})  "
                  f"[{color}{status}{NC}]")

        if base["median_s"] is not None and curr["median_s"] is not None:
            b_s, c_s = float(base["median_s"]), float(curr["median_s"])
            print(f"  median S    {b_s:6.1f} -> {c_s:<6.1f}")
        print()

    print(f"{BLUE}========================================")
    print("Summary")
    print(f"========================================{NC}")
    print()
    print(f"  Regressions:  {RED}{regressions}{NC}")
    print(f"  Improvements: {GREEN}{improvements}{NC}")
    print(f"  Unchanged:    {unchanged}")
    if missing > 0:
        print(f"  Missing:      {YELLOW}{missing}{NC}")
    print()

    if regressions > 0:
        print(f"{RED}STATUS: REGRESSION DETECTED{NC}")
        return 1 if fail_on_regression else 0
    print(f"{GREEN}STATUS: PASS{NC}")
    return 0


def main(argv: Optional[list] = None) -> int:
    parser = argparse.ArgumentParser(description="Compare screening simulation reports")
    parser.add_argument("first", help="Baseline report (or the current report when alone)")
    parser.add_argument("second", nargs="?", help="Current report")
    parser.add_argument("--fail-on-regression", "-f", action="store_true",
                        help="Exit non-zero if a Pa regression is detected")
    parser.add_argument("--threshold", "-t", type=float, default=REGRESSION_THRESHOLD,
                        help="Absolute Pa drop that counts as a regression "
                             f"(default: {REGRESSION_THRESHOLD})")
    parser.add_argument("--anchor-p", type=int,
                        help="p used to pick the anchor case (default: the report's own p)")
    args = parser.parse_args(argv)

    if args.second:
        baseline_file, current_file = Path(args.first), Path(args.second)
    else:
        baseline_file, current_file = DEFAULT_ANCHORS, Path(args.first)

    for label, path in (("Baseline", baseline_file), ("Current report", current_file)):
        if not path.exists():
            print(f"{RED}Error: {label} file not found: {path}{NC}", file=sys.stderr)
            return 1

    return compare_reports(baseline_file, current_file, args.threshold,
                           args.fail_on_regression, args.anchor_p)


if __name__ == "__main__":
    sys.exit(main())
