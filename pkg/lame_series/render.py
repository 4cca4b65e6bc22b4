"""
Output rendering for the CLI: human tables, CSV and JSON.

Every float goes out with 17 significant digits so CSV and JSON values
parse back to the identical double. JSON documents have the shape

    {"command": "eval", "config": {...RunConfig.to_dict()...}, "rows": [...]}

and are accepted back by --config.

CSV columns per command:
    eval          x, lambda, mode, value, y0..yN, tail, metric
    compare       x, lambda, mode, y_3trf, y_oracle, rel_err, tail, ok
    residual      x, lambda, mode, N, residual
    domain        row, case, lo, hi
    kernel-check  l, alpha_l, lambda, i_prev, eta, gap

Human output of eval drops the y0..yN block and shows levels and the
stop reason instead.
"""

from __future__ import annotations
import csv
import json
import logging
from typing import Any, Optional, TextIO

from .config import OutputFormat, RunConfig
from .models import DomainReport

logger = logging.getLogger(__name__)

FLOAT_FORMAT = ".17g"

COLUMNS = {
    "compare": ["x", "lambda", "mode", "y_3trf", "y_oracle", "rel_err", "tail", "ok"],
    "residual": ["x", "lambda", "mode", "N", "residual"],
    "domain": ["row", "case", "lo", "hi"],
    "kernel-check": ["l", "alpha_l", "lambda", "i_prev", "eta", "gap"],
}

HUMAN_COLUMNS = {
    "eval": ["x", "value", "tail", "metric", "levels", "stop_reason"],
}


def fmt(value: Any) -> str:
    """Cell text: floats at 17 digits, None empty, bools lower-case."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format(value, FLOAT_FORMAT)
    return str(value)


def eval_columns(rows: list[dict]) -> list[str]:
    width = max((len(r.get("sub_values", ())) for r in rows), default=0)
    return ["x", "lambda", "mode", "value"] + [f"y{m}" for m in range(width)] + ["tail", "metric"]


def _flatten(command: str, row: dict) -> dict:
    if command != "eval":
        return row
    flat = {k: v for k, v in row.items() if k != "sub_values"}
    for m, value in enumerate(row.get("sub_values", ())):
        flat[f"y{m}"] = value
    return flat


def _columns(command: str, rows: list[dict]) -> list[str]:
    if command == "eval":
        return eval_columns(rows)
    return COLUMNS[command]


# ── Writers ──────────────────────────────────────────────────────────

def write_csv(command: str, rows: list[dict], stream: TextIO) -> None:
    columns = _columns(command, rows)
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        flat = _flatten(command, row)
        writer.writerow([fmt(flat.get(col)) for col in columns])


def json_document(command: str, cfg: Optional[RunConfig], rows: list[dict]) -> dict:
    return {
        "command": command,
        "config": cfg.to_dict() if cfg is not None else None,
        "rows": rows,
    }


def write_json(command: str, cfg: Optional[RunConfig], rows: list[dict], stream: TextIO) -> None:
    # json writes floats with repr(), which already round-trips exactly
    stream.write(json.dumps(json_document(command, cfg, rows), indent=2))
    stream.write("\n")


def write_human(command: str, rows: list[dict], stream: TextIO) -> None:
    columns = HUMAN_COLUMNS.get(command) or _columns(command, rows)
    table = [[fmt(_flatten(command, row).get(col)) for col in columns] for row in rows]
    widths = [max([len(col)] + [len(line[i]) for line in table]) for i, col in enumerate(columns)]
    stream.write("  ".join(col.ljust(w) for col, w in zip(columns, widths)).rstrip() + "\n")
    stream.write("  ".join("─" * w for w in widths) + "\n")
    for line in table:
        stream.write("  ".join(cell.ljust(w) for cell, w in zip(line, widths)).rstrip() + "\n")


def write_domain_human(report: DomainReport, stream: TextIO, points: list[dict] = ()) -> None:
    stream.write(f"row {report.case.row}: {report.case_label}\n")
    if not report.intervals:
        stream.write("no solution (a coincides with b or c)\n")
        return
    for lo, hi in report.intervals:
        stream.write(f"  ({fmt(lo)}, {fmt(hi)})\n")
    stream.write(f"radius of convergence: {fmt(report.radius)}\n")
    if report.metric_at is not None:
        x, metric = report.metric_at
        inside = "inside" if metric < 1 else "outside"
        stream.write(f"metric at x={fmt(x)}: {fmt(metric)} ({inside})\n")
    for point in points:
        inside = "inside" if point["inside"] else "outside"
        stream.write(f"metric at x={fmt(point['x'])}: {fmt(point['metric'])} ({inside})\n")
    if not report.table_agrees:
        stream.write(
            f"warning: table formulas disagree with quadratic roots "
            f"(max gap {fmt(report.table_discrepancy)})\n"
        )


def domain_rows(report: DomainReport) -> list[dict]:
    if not report.intervals:
        return [{"row": report.case.row, "case": report.case.name.lower(), "lo": None, "hi": None}]
    return [
        {"row": report.case.row, "case": report.case.name.lower(), "lo": lo, "hi": hi}
        for lo, hi in report.intervals
    ]


def render(
    command: str,
    cfg: Optional[RunConfig],
    rows: list[dict],
    stream: TextIO,
    output: OutputFormat = None,
) -> None:
    """Write rows in the format the config asks for (or the one given)."""
    output = output or (cfg.output if cfg is not None else OutputFormat.HUMAN)
    logger.debug(f"render {command}: {len(rows)} rows as {output.value}")
    if output is OutputFormat.JSON:
        write_json(command, cfg, rows, stream)
    elif output is OutputFormat.CSV:
        write_csv(command, rows, stream)
    else:
        write_human(command, rows, stream)
