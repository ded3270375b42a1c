"""Deterministic CSV output: sorted rows, 17 significant digits, LF endings."""

from __future__ import annotations

import csv
import io
import json
from importlib import metadata
from pathlib import Path
from typing import Optional

from .config import ExperimentConfig
from .runner import summarize

COLUMNS = ["row_type", "domain", "algorithm", "budget", "trial", "initial_state", "action",
           "error", "mean_error", "std_error", "count"]
TIMING_COLUMNS = ["domain", "algorithm", "budget", "trial", "wall_time"]


def fmt(x: float) -> str:
    return format(float(x), ".17g")


def repo_version() -> str:
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:
        return "0+unknown"


def header_lines(meta: dict) -> list[str]:
    return [f"# {key}: {value}" for key, value in meta.items()]


def bench_meta(cfg: ExperimentConfig) -> dict:
    return {"version": repo_version(), "seed": cfg.seed, "config_hash": cfg.config_hash(),
            "config": json.dumps(cfg.resolved(), sort_keys=True, separators=(",", ":"))}


def render_bench(cfg: ExperimentConfig, records: list) -> str:
    buf = io.StringIO()
    for line in header_lines(bench_meta(cfg)):
        buf.write(line + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(COLUMNS)
    for r in records:
        w.writerow(["detail", r.domain, r.algorithm, r.budget, r.trial, r.initial_state, r.action,
                    fmt(r.error), "", "", ""])
    for s in summarize(records):
        w.writerow(["summary", s.domain, s.algorithm, s.budget, "", "", "", "",
                    fmt(s.mean_error), fmt(s.std_error), s.count])
    return buf.getvalue()


def render_timing(records: list) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(TIMING_COLUMNS)
    for r in records:
        w.writerow([r.domain, r.algorithm, r.budget, r.trial, fmt(r.wall_time)])
    return buf.getvalue()


def render_rows(meta: dict, columns: list, rows: list[dict]) -> str:
    buf = io.StringIO()
    for line in header_lines(meta):
        buf.write(line + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([fmt(row[c]) if isinstance(row[c], float) else row[c] for c in columns])
    return buf.getvalue()


def write_text(text: str, out: Optional[str]) -> None:
    if out is None or out == "-":
        import sys
        sys.stdout.write(text)
        return
    path = Path(out)
    if path.parent != Path("."):
        path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def timing_path(out: str) -> str:
    return out + ".timing.csv"


def read_bench_csv(path: str) -> tuple[dict, list[dict]]:
    """(header metadata, rows as dicts) of a file written by render_bench."""
    meta, lines = {}, []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.startswith("#"):
                key, _, value = line[2:].rstrip("\n").partition(": ")
                meta[key] = value
            else:
                lines.append(line)
    return meta, list(csv.DictReader(lines))
