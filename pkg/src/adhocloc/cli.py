"""Command-line interface: single runs, sweeps and protocol comparisons.

Exit codes: 0 success, 1 configuration problem, 2 scenario aborted
(network partition outlasted the grace period), 3 simulation invariant
violated (results discarded).
"""

from __future__ import annotations

import argparse
import csv
import sys
from typing import Optional, Sequence

from .config import ConfigError, ScenarioConfig, load_config_file, parse_config_text
from .metrics import MetricsError
from .mobility import write_trajectory_csv
from .scenario import InvariantViolation, ScenarioResult, run_scenario
from .sweep import comparison_table, report_to_row, run_sweep, write_csv, _fmt

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_ABORTED = 2
EXIT_INVARIANT = 3


def _split_list(raw: str) -> list[str]:
    return [part.strip() for part in raw.split(",") if part.strip()]


def _load_config(path: Optional[str], overrides: Sequence[str]) -> ScenarioConfig:
    cfg = load_config_file(path) if path else ScenarioConfig().validated()
    if overrides:
        text = "\n".join(item.replace("=", " = ", 1) for item in overrides)
        cfg = parse_config_text(text, base=cfg)
    return cfg


def _dump_messages(result: ScenarioResult, path: str) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["request_id", "kind", "src", "dst", "hops", "t"])
        for row in result.ledger.rows:
            writer.writerow([
                "" if row.request_id is None else row.request_id,
                row.kind.value, row.src, row.dst, row.units, _fmt(row.t),
            ])


def _dump_trace(result: ScenarioResult, path: str) -> None:
    with open(path, "w", newline="") as fh:
        write_trajectory_csv(result.model, result.cfg.duration,
                             result.cfg.metric_dt, fh)


def _print_report(result: ScenarioResult, out) -> None:
    report = result.report
    print(f"protocol:        {report.protocol}", file=out)
    print(f"lambda:          {_fmt(report.lam)} req/s", file=out)
    print(f"node mobility:   target {_fmt(report.node_mob_target)}, "
          f"measured {_fmt(report.measured_mob)}", file=out)
    print(f"code band:       {report.code_band}", file=out)
    print(f"seed:            {report.seed}", file=out)
    print(f"requests:        {report.n_requests} measured "
          f"({report.n_resolved} resolved, {report.n_failed} failed, "
          f"{report.n_in_flight} in flight, {report.n_warmup} warm-up)", file=out)
    print(f"total messages:  {report.total_messages}", file=out)
    print(f"Nb_msg:          {_fmt(report.nb_msg)}", file=out)
    print(f"Rtime:           {_fmt(report.rtime_s)} s", file=out)
    if report.aborted:
        print(f"aborted:         yes ({result.abort_reason})", file=out)


def cmd_run(args) -> int:
    cfg = _load_config(args.config, args.set or [])
    result = run_scenario(cfg, trace=False)
    _print_report(result, sys.stdout)
    row = report_to_row(result.report)
    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            write_csv([row], fh)
    else:
        write_csv([row], sys.stdout)
    if args.dump_trace:
        _dump_trace(result, args.dump_trace)
    if args.dump_messages:
        _dump_messages(result, args.dump_messages)
    return EXIT_ABORTED if result.aborted else EXIT_OK


def _axes_from_args(cfg: ScenarioConfig, args) -> dict:
    return {
        "protocols": _split_list(args.protocols) if args.protocols else [cfg.protocol],
        "lambdas": ([float(v) for v in _split_list(args.lambdas)]
                    if args.lambdas else [cfg.lam]),
        "node_mobs": (_split_list(args.node_mobs)
                      if args.node_mobs else [cfg.node_mob]),
        "code_bands": (_split_list(args.code_bands)
                       if args.code_bands else [cfg.code_band]),
        "seeds": ([int(v) for v in _split_list(args.seeds)]
                  if args.seeds else [cfg.seed]),
    }


def cmd_sweep(args) -> int:
    cfg = _load_config(args.config, args.set or [])
    axes = _axes_from_args(cfg, args)
    rows = run_sweep(cfg, average=not args.no_average, **axes)
    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            write_csv(rows, fh)
    else:
        write_csv(rows, sys.stdout)
    return EXIT_ABORTED if any(row["aborted"] for row in rows) else EXIT_OK


def cmd_compare(args) -> int:
    cfg = _load_config(args.config, args.set or [])
    axes = _axes_from_args(cfg, args)
    rows = run_sweep(cfg, average=True, **axes)
    print(comparison_table(rows))
    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            write_csv(rows, fh)
    return EXIT_ABORTED if any(row["aborted"] for row in rows) else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="adhocloc",
        description="Deterministic simulator comparing mobile-code "
                    "localization protocols in an ad hoc network.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser, config_required: bool) -> None:
        if config_required:
            p.add_argument("config", help="scenario config file (key = value lines)")
        else:
            p.add_argument("config", nargs="?", default=None,
                           help="scenario config file (key = value lines)")
        p.add_argument("--set", action="append", metavar="KEY=VALUE",
                       help="override a config key (repeatable)")
        p.add_argument("--csv", metavar="PATH", help="write result rows here")

    p_run = sub.add_parser("run", help="run one scenario")
    common(p_run, config_required=False)
    p_run.add_argument("--dump-trace", metavar="PATH",
                       help="write sampled node trajectories (node_id,t,x,y)")
    p_run.add_argument("--dump-messages", metavar="PATH",
                       help="write the raw message log "
                            "(request_id,kind,src,dst,hops,t)")
    p_run.set_defaults(fn=cmd_run)

    def axes(p: argparse.ArgumentParser) -> None:
        p.add_argument("--protocols", help="comma list of protocols")
        p.add_argument("--lambda", dest="lambdas", help="comma list of request rates")
        p.add_argument("--node-mobs", help="comma list of node mobility labels")
        p.add_argument("--code-bands", help="comma list of code mobility bands")
        p.add_argument("--seeds", help="comma list of seeds")

    p_sweep = sub.add_parser("sweep", help="run a scenario grid")
    common(p_sweep, config_required=False)
    axes(p_sweep)
    p_sweep.add_argument("--no-average", action="store_true",
                         help="omit the seed-averaged rows")
    p_sweep.set_defaults(fn=cmd_sweep)

    p_cmp = sub.add_parser("compare",
                           help="run protocols on the same seeds and rank them")
    common(p_cmp, config_required=False)
    axes(p_cmp)
    p_cmp.set_defaults(fn=cmd_compare)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except (ConfigError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except (InvariantViolation, MetricsError) as err:
        print(f"invariant violated: {err}", file=sys.stderr)
        return EXIT_INVARIANT


if __name__ == "__main__":
    sys.exit(main())
