"""Serialization of screening and simulation results.

JSON payloads carry no timestamps, so identical runs give identical bytes.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Dict, Mapping, Optional

import pandas as pd

from .simulate import EvalReport, ModelSpec
from .screen import ScreeningResult


def prob_label(p: float) -> str:
    return f"{p * 100:g}%"


def cutoff_labels(cutoffs) -> Dict[int, str]:
    return {d: f"d{i + 1}" for i, d in enumerate(cutoffs)}


def eval_report_to_dict(report: EvalReport) -> dict:
    labels = cutoff_labels(report.cutoffs)
    return {
        "method": report.method,
        "model_id": report.model.model_id,
        "replications": report.replications,
        "cutoffs": {labels[d]: d for d in report.cutoffs},
        "active_blocks": list(report.active_blocks),
        "active_labels": list(report.active_labels),
        "s_quantiles": {prob_label(p): v for p, v in report.s_quantiles.items()},
        "ps_table": {
            labels[d]: dict(zip(report.active_labels, report.ps_table[d])) for d in report.cutoffs
        },
        "pa_table": {labels[d]: report.pa_table[d] for d in report.cutoffs},
        "min_model_sizes": list(report.s_values),
    }


def simulation_payload(model: ModelSpec, reports: Mapping[str, EvalReport],
                       preset: Optional[str] = None) -> dict:
    return {
        "preset": preset,
        "model": model.to_dict(),
        "reports": {method: eval_report_to_dict(r) for method, r in reports.items()},
    }


def dump_json(payload, path) -> None:
    text = json.dumps(payload, indent=2, sort_keys=False, allow_nan=False)
    Path(path).write_text(text + "\n", encoding="utf-8")


def eval_table(reports: Mapping[str, EvalReport]) -> pd.DataFrame:
    """One row per method: S quantiles, then per-active Ps and Pa at each cutoff."""
    rows = []
    for method, r in reports.items():
        row = {"method": method, "model": r.model.model_id}
        for p, v in r.s_quantiles.items():
            row[f"S_{prob_label(p)}"] = v
        for d, label in cutoff_labels(r.cutoffs).items():
            for name, ps in zip(r.active_labels, r.ps_table[d]):
                row[f"Ps_{name}_{label}"] = ps
            row[f"Pa_{label}"] = r.pa_table[d]
        rows.append(row)
    return pd.DataFrame(rows)


def write_eval_csv(reports: Mapping[str, EvalReport], path) -> None:
    eval_table(reports).to_csv(path, index=False, float_format="%.6g")


def eval_markdown(reports: Mapping[str, EvalReport]) -> str:
    """Markdown summary mirroring the layout of the simulation tables."""
    if not reports:
        return ""
    first = next(iter(reports.values()))
    labels = cutoff_labels(first.cutoffs)
    probs = list(first.s_quantiles)

    md = []
    md.append(f"### Minimum model size S (model {first.model.model_id}, "
              f"n={first.model.n}, p={first.model.p}, rho={first.model.rho:g}, "
              f"{first.replications} reps)")
    md.append("")
    md.append("| Method | " + " | ".join(prob_label(p) for p in probs) + " |")
    md.append("|--------|" + "|".join("------" for _ in probs) + "|")
    for method, r in reports.items():
        md.append(f"| {method} | " + " | ".join(f"{r.s_quantiles[p]:.1f}" for p in probs) + " |")
    md.append("")

    md.append("### Selection proportions Ps / Pa")
    md.append("")
    cols = list(first.active_labels) + ["ALL"]
    md.append("| Method | size | " + " | ".join(cols) + " |")
    md.append("|--------|------|" + "|".join("-----" for _ in cols) + "|")
    for method, r in reports.items():
        for d in r.cutoffs:
            cells = [f"{v:.2f}" for v in r.ps_table[d]] + [f"{r.pa_table[d]:.2f}"]
            md.append(f"| {method} | {labels[d]}={d} | " + " | ".join(cells) + " |")
    md.append("")
    return "\n".join(md)


def utilities_frame(data, result: ScreeningResult) -> pd.DataFrame:
    ranks = {b: i + 1 for i, b in enumerate(result.ranking)}
    return pd.DataFrame({
        "block_id": [b.block_id for b in data.groups],
        "name": [data.block_label(b.block_id) for b in data.groups],
        "utility": result.utilities,
        "rank": [ranks[b.block_id] for b in data.groups],
    })


def write_utilities_csv(data, result: ScreeningResult, path) -> None:
    utilities_frame(data, result).to_csv(path, index=False, float_format="%.17g")


def selection_payload(data, result: ScreeningResult) -> dict:
    return {
        "method": result.method,
        "rule": result.rule.to_dict(),
        "n": data.n,
        "G": data.n_blocks,
        "selected": [
            {"block_id": b, "name": data.block_label(b), "utility": float(result.utilities[b - 1])}
            for b in result.selected
        ],
        "warnings": list(result.warnings),
    }
