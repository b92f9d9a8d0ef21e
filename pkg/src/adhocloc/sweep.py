"""Sweeps over load, mobility, code band and protocol; CSV rows; comparisons.

Cells run sequentially in deterministic (axis, seed) order and every float is
serialized with one fixed format, so a sweep CSV is byte-stable: rerunning any
cell with the same config and seed reproduces its row exactly.
"""

from __future__ import annotations

import csv
from typing import IO, Iterable, Optional, Sequence

from .config import ScenarioConfig
from .metrics import MetricsReport
from .scenario import ScenarioResult, run_scenario

CSV_COLUMNS = ("protocol", "lambda", "node_mob_target", "measured_mob",
               "code_band", "seed", "n_requests", "n_failed",
               "total_messages", "nb_msg", "rtime_s", "aborted")

#: seed column value for rows averaged across seeds
AVERAGE_SEED = "avg"


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float):
        return format(value, ".9g")
    return str(value)


def report_to_row(report: MetricsReport) -> dict:
    """One result row, keyed by CSV_COLUMNS, values still typed."""
    return {
        "protocol": report.protocol,
        "lambda": report.lam,
        "node_mob_target": report.node_mob_target,
        "measured_mob": report.measured_mob,
        "code_band": report.code_band,
        "seed": report.seed,
        "n_requests": report.n_requests,
        "n_failed": report.n_failed,
        "total_messages": report.total_messages,
        "nb_msg": report.nb_msg,
        "rtime_s": report.rtime_s,
        "aborted": report.aborted,
    }


def average_row(rows: Sequence[dict]) -> dict:
    """Seed-averaged row over same-cell results; seed becomes "avg"."""
    if not rows:
        raise ValueError("cannot average zero rows")

    def mean_of(column: str) -> Optional[float]:
        values = [row[column] for row in rows if row[column] is not None]
        if not values:
            return None
        return float(sum(values)) / len(values)

    first = rows[0]
    return {
        "protocol": first["protocol"],
        "lambda": first["lambda"],
        "node_mob_target": first["node_mob_target"],
        "measured_mob": mean_of("measured_mob"),
        "code_band": first["code_band"],
        "seed": AVERAGE_SEED,
        "n_requests": mean_of("n_requests"),
        "n_failed": mean_of("n_failed"),
        "total_messages": mean_of("total_messages"),
        "nb_msg": mean_of("nb_msg"),
        "rtime_s": mean_of("rtime_s"),
        "aborted": any(row["aborted"] for row in rows),
    }


def write_csv(rows: Iterable[dict], fh: IO[str]) -> int:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    count = 0
    for row in rows:
        writer.writerow([_fmt(row[col]) for col in CSV_COLUMNS])
        count += 1
    return count


def run_sweep(base: ScenarioConfig,
              protocols: Sequence[str],
              lambdas: Sequence[float],
              node_mobs: Sequence[str],
              code_bands: Sequence[str],
              seeds: Sequence[int],
              average: bool = True,
              on_result=None) -> list[dict]:
    """Run the full grid; per-seed rows first, then the cell's averaged row."""
    rows: list[dict] = []
    for protocol in protocols:
        for lam in lambdas:
            for node_mob in node_mobs:
                for code_band in code_bands:
                    cell_rows = []
                    for seed in seeds:
                        cfg = base.replace(protocol=protocol, lam=lam,
                                           node_mob=node_mob,
                                           code_band=code_band, seed=seed)
                        result = run_scenario(cfg)
                        row = report_to_row(result.report)
                        cell_rows.append(row)
                        rows.append(row)
                        if on_result is not None:
                            on_result(result)
                    if average and len(seeds) > 1:
                        rows.append(average_row(cell_rows))
    return rows


def comparison_table(rows: Sequence[dict]) -> str:
    """Protocol ordering per lambda from seed-averaged (or single-seed) rows.

    Lists Nb_msg and Rtime per protocol, cheapest first, one block per lambda.
    """
    averaged = [r for r in rows if r["seed"] == AVERAGE_SEED] or list(rows)
    lams = sorted({r["lambda"] for r in averaged})
    lines = []
    for lam in lams:
        block = sorted((r for r in averaged if r["lambda"] == lam),
                       key=lambda r: (r["nb_msg"] is None,
                                      r["nb_msg"] if r["nb_msg"] is not None else 0.0))
        lines.append(f"lambda = {_fmt(lam)}")
        lines.append(f"  {'protocol':<20} {'nb_msg':>12} {'rtime_s':>10} {'aborted':>8}")
        for row in block:
            lines.append(f"  {row['protocol']:<20} {_fmt(row['nb_msg']):>12} "
                         f"{_fmt(row['rtime_s']):>10} {_fmt(row['aborted']):>8}")
    return "\n".join(lines)
