"""CSV schemas, JSON report documents, and SVG/TSV emission.

File formats:

OutcomesFile  — header exactly ``run_id,t,outcome``; t strictly increasing
                within each run; outcomes in 1..6.
CountsFile    — header exactly ``a,b,bin,n_oo,n_oe,n_eo,n_ee,n_ou,n_uo,
                n_eu,n_ue,n_uu,nA_o,nB_o,trials``.
ValuesFile    — header exactly ``run_id,value``; per-run real values (e.g.
                per-bin J) for auditing.
ReportDocument — JSON; floats serialized with their shortest round-trip
                representation, so parse(emit(x)) == x exactly.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict
from pathlib import Path
from typing import List

import numpy as np
import pandas as pd

from .errors import CsvFormatError
from .eberhard import SettingCounts
from .homogeneity import HomogeneityReport, RunSample, RunSet
from .stats import SignificanceSummary

OUTCOMES_HEADER = "run_id,t,outcome"
COUNTS_HEADER = (
    "a,b,bin,n_oo,n_oe,n_eo,n_ee,n_ou,n_uo,n_eu,n_ue,n_uu,nA_o,nB_o,trials"
)
VALUES_HEADER = "run_id,value"


def _check_header(path: Path, expected: str) -> None:
    with open(path, "r", encoding="utf-8") as fh:
        first = fh.readline().rstrip("\r\n")
    if first != expected:
        raise CsvFormatError(1, f"expected header '{expected}', got '{first}'")


def _read_int_frame(path: Path, columns: List[str]) -> pd.DataFrame:
    try:
        df = pd.read_csv(path)
    except Exception as exc:
        raise CsvFormatError(2, f"unparseable CSV: {exc}") from exc
    if list(df.columns) != columns:
        raise CsvFormatError(1, f"expected columns {columns}")
    for col in columns:
        numeric = pd.to_numeric(df[col], errors="coerce")
        bad = numeric.isna() | (numeric % 1 != 0)
        if bad.any():
            raise CsvFormatError(
                int(bad.idxmax()) + 2, f"non-integer value in column '{col}'"
            )
        df[col] = numeric.astype(np.int64)
    return df


def write_outcomes_csv(path, runset: RunSet) -> None:
    frames = []
    for run in runset.runs:
        n = run.outcomes.size
        frames.append(
            pd.DataFrame(
                {
                    "run_id": np.full(n, run.run_id, dtype=np.int64),
                    "t": np.arange(1, n + 1, dtype=np.int64),
                    "outcome": run.outcomes,
                }
            )
        )
    pd.concat(frames).to_csv(path, index=False, lineterminator="\n")


def read_outcomes_csv(path) -> RunSet:
    path = Path(path)
    _check_header(path, OUTCOMES_HEADER)
    df = _read_int_frame(path, ["run_id", "t", "outcome"])
    if df.empty:
        raise CsvFormatError(2, "no data rows")
    bad = (df["outcome"] < 1) | (df["outcome"] > 6)
    if bad.any():
        raise CsvFormatError(int(bad.idxmax()) + 2, "outcome outside 1..6")
    runs = []
    for run_id in df["run_id"].unique():
        sub = df[df["run_id"] == run_id]
        t = sub["t"].to_numpy()
        if np.any(np.diff(t) <= 0):
            row = sub.index[int(np.argmax(np.diff(t) <= 0)) + 1]
            raise CsvFormatError(
                int(row) + 2, f"t not strictly increasing in run {run_id}"
            )
        runs.append(RunSample(int(run_id), sub["outcome"].to_numpy(), "categorical"))
    return RunSet(runs, m=6)


def write_values_csv(path, runset: RunSet) -> None:
    frames = []
    for run in runset.runs:
        frames.append(
            pd.DataFrame({"run_id": run.run_id, "value": run.outcomes})
        )
    pd.concat(frames).to_csv(path, index=False, lineterminator="\n")


def read_values_csv(path) -> RunSet:
    path = Path(path)
    _check_header(path, VALUES_HEADER)
    try:
        df = pd.read_csv(path)
    except Exception as exc:
        raise CsvFormatError(2, f"unparseable CSV: {exc}") from exc
    if list(df.columns) != ["run_id", "value"]:
        raise CsvFormatError(1, "expected columns ['run_id', 'value']")
    values = pd.to_numeric(df["value"], errors="coerce")
    if values.isna().any():
        raise CsvFormatError(
            int(values.isna().idxmax()) + 2, "non-numeric value"
        )
    runs = []
    for run_id in df["run_id"].unique():
        sub = values[df["run_id"] == run_id]
        runs.append(RunSample(int(run_id), sub.to_numpy(np.float64), "real"))
    return RunSet(runs)


_COUNT_COLS = [
    "n_oo", "n_oe", "n_eo", "n_ee", "n_ou", "n_uo", "n_eu", "n_ue", "n_uu",
]


def write_counts_csv(path, counts: List[SettingCounts]) -> None:
    rows = {
        "a": [c.setting[0] for c in counts],
        "b": [c.setting[1] for c in counts],
        "bin": [c.bin for c in counts],
    }
    for col in _COUNT_COLS:
        rows[col] = [getattr(c, col) for c in counts]
    rows["nA_o"] = [c.nA_o for c in counts]
    rows["nB_o"] = [c.nB_o for c in counts]
    rows["trials"] = [c.trials for c in counts]
    pd.DataFrame(rows).to_csv(path, index=False, lineterminator="\n")


def read_counts_csv(path) -> List[SettingCounts]:
    path = Path(path)
    _check_header(path, COUNTS_HEADER)
    df = _read_int_frame(path, COUNTS_HEADER.split(","))
    counts = []
    for idx, row in df.iterrows():
        if row["a"] not in (1, 2) or row["b"] not in (1, 2):
            raise CsvFormatError(int(idx) + 2, "setting indices must be 1 or 2")
        try:
            counts.append(
                SettingCounts(
                    setting=(int(row["a"]), int(row["b"])),
                    bin=int(row["bin"]),
                    **{col: int(row[col]) for col in _COUNT_COLS},
                    nA_o=int(row["nA_o"]),
                    nB_o=int(row["nB_o"]),
                    trials=int(row["trials"]),
                )
            )
        except Exception as exc:
            raise CsvFormatError(int(idx) + 2, str(exc)) from exc
    return counts


def summary_dict(s: SignificanceSummary) -> dict:
    d = asdict(s)
    # JSON has no infinity literal
    if math.isinf(d["k_sigma"]):
        d["k_sigma"] = "inf" if d["k_sigma"] > 0 else "-inf"
    return d


def homogeneity_dict(report: HomogeneityReport) -> dict:
    return {
        "alpha": report.alpha,
        "corrected_alpha": report.corrected_alpha,
        "verdict": report.verdict,
        "results": [
            {
                "name": r.name,
                "statistic": r.statistic,
                "dof": r.dof,
                "p_value": r.p_value,
                "detail": _jsonable(r.detail),
            }
            for r in report.results
        ],
        "errors": report.errors,
    }


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, float) and math.isinf(obj):
        return "inf" if obj > 0 else "-inf"
    return obj


def write_report(path, document: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(_jsonable(document), fh, indent=2)
        fh.write("\n")


def read_report(path) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def render_svg(per_bin_j: List[float], mean: float, sem: float) -> str:
    """Standalone SVG: per-bin J bars with a mean +/- SEM band."""
    width, height = 900, 420
    margin = 50
    n = len(per_bin_j)
    lo = min(min(per_bin_j), mean - sem, 0.0)
    hi = max(max(per_bin_j), mean + sem, 0.0)
    span = hi - lo or 1.0
    lo -= 0.05 * span
    hi += 0.05 * span
    span = hi - lo

    def ypix(v: float) -> float:
        return margin + (hi - v) / span * (height - 2 * margin)

    bar_w = (width - 2 * margin) / max(n, 1)
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
        f'height="{height}" viewBox="0 0 {width} {height}">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
        f'<rect x="{margin}" y="{min(ypix(mean - sem), ypix(mean + sem)):.2f}" '
        f'width="{width - 2 * margin}" '
        f'height="{abs(ypix(mean - sem) - ypix(mean + sem)):.2f}" '
        f'fill="#cfe3ff" opacity="0.8"/>',
    ]
    y0 = ypix(0.0)
    for i, v in enumerate(per_bin_j):
        x = margin + i * bar_w
        top = min(ypix(v), y0)
        parts.append(
            f'<rect x="{x + 1:.2f}" y="{top:.2f}" width="{bar_w - 2:.2f}" '
            f'height="{abs(ypix(v) - y0):.2f}" fill="#4478c4"/>'
        )
    parts.append(
        f'<line x1="{margin}" y1="{ypix(mean):.2f}" x2="{width - margin}" '
        f'y2="{ypix(mean):.2f}" stroke="#d43f3f" stroke-width="2"/>'
    )
    parts.append(
        f'<line x1="{margin}" y1="{y0:.2f}" x2="{width - margin}" '
        f'y2="{y0:.2f}" stroke="black" stroke-width="1"/>'
    )
    parts.append(
        f'<text x="{margin}" y="{margin - 15}" font-family="sans-serif" '
        f'font-size="14">per-bin J (mean {mean:.6g}, SEM {sem:.6g})</text>'
    )
    parts.append("</svg>")
    return "\n".join(parts)
