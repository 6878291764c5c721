"""Method comparison table built from evaluation reports on one start/goal set."""

from __future__ import annotations

import csv
import io
import math
from pathlib import Path

from . import plots
from .evaluate import EvalReport, check_same_protocol, common_successes

BENCH_HEADER = "# sddpg-bench/1"
BENCH_FIELDS = ["method", "episodes", "success", "collision", "timeout", "avg_distance", "avg_speed",
                "common_successes", "pairs_hash"]


def bench_rows(reports: list[EvalReport]) -> list[dict]:
    """One row per report. Route metrics use only episodes every method solved."""
    if not reports:
        raise ValueError("need at least one evaluation report")
    check_same_protocol(reports)
    common = common_successes(reports)
    rows = []
    for r in reports:
        rates = r.rates()
        dist, speed = r.route_metrics(common)
        rows.append({"method": r.method, "episodes": len(r.episodes), "success": rates["goal"],
                     "collision": rates["collision"], "timeout": rates["timeout"],
                     "avg_distance": dist, "avg_speed": speed, "common_successes": len(common),
                     "pairs_hash": r.pairs_hash})
    return rows


def format_bench(rows) -> str:
    buf = io.StringIO()
    buf.write(BENCH_HEADER + "\n")
    writer = csv.DictWriter(buf, fieldnames=BENCH_FIELDS, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: repr(v) if isinstance(v, float) else v for k, v in row.items()})
    return buf.getvalue()


def read_bench(path) -> list[dict]:
    lines = Path(path).read_text().splitlines()
    if not lines or lines[0] != BENCH_HEADER:
        raise ValueError(f"{path} is not a bench table")
    rows = []
    for row in csv.DictReader(lines[1:]):
        out = dict(row)
        for key in ("success", "collision", "timeout", "avg_distance", "avg_speed"):
            out[key] = float(row[key])
        for key in ("episodes", "common_successes"):
            out[key] = int(row[key])
        rows.append(out)
    return rows


def run_bench(reports: list[EvalReport], out_dir, worlds=None) -> list[dict]:
    """Write ``bench.csv``, a bar chart when there are two or more methods, and heatmaps."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rows = bench_rows(reports)
    (out / "bench.csv").write_text(format_bench(rows))
    if len(rows) >= 2:
        plots.outcome_bars([{**r, "avg_distance": _zero_nan(r["avg_distance"]),
                             "avg_speed": _zero_nan(r["avg_speed"])} for r in rows], out / "bench.svg")
    for r in reports:
        world = (worlds or {}).get(r.world)
        plots.heatmap(r, out / f"heatmap_{r.method}.svg", world)
    return rows


def _zero_nan(x: float) -> float:
    return 0.0 if math.isnan(x) else x
