"""Command-line entry point: ``run``, ``summarize`` and ``landscape``."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .config import ConfigError, load_config
from .reporting import (
    dump_landscape,
    run_experiment,
    summarize_seeds,
    write_aggregate,
    write_landscape,
)


def _int_list(text: str) -> list[int]:
    try:
        return [int(t) for t in text.replace(" ", "").split(",") if t]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hibo", description="Tree-guided trust-region Bayesian optimization.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one configured experiment")
    p_run.add_argument("--config", required=True, help="JSON run configuration")
    p_run.add_argument("--out", default=None, help="output directory (overrides the config)")

    p_sum = sub.add_parser("summarize", help="aggregate trace files across seeds")
    p_sum.add_argument("--out", required=True, help="aggregate CSV to write")
    p_sum.add_argument("traces", nargs="+", help="trace.csv files")

    p_land = sub.add_parser("landscape", help="dump top acquisition values on a 2-D grid")
    p_land.add_argument("--config", required=True)
    p_land.add_argument("--iters", required=True, type=_int_list, help="e.g. 20,50,100")
    p_land.add_argument("--grid", type=int, default=100)
    p_land.add_argument("--topk", type=int, default=1000)
    p_land.add_argument("--out", default=None, help="CSV path (default: <output_dir>/landscape.csv)")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "run":
            config = load_config(args.config)
            summary = run_experiment(config, args.out)
            print(json.dumps(summary, indent=2, sort_keys=True))
        elif args.command == "summarize":
            table = summarize_seeds(args.traces)
            write_aggregate(args.out, table)
            print(f"wrote {args.out} ({int(table['n_traces'][0])} traces)")
        else:
            config = load_config(args.config)
            rows = dump_landscape(config, args.iters, args.grid, args.topk)
            out = Path(args.out) if args.out else Path(config.output_dir) / "landscape.csv"
            out.parent.mkdir(parents=True, exist_ok=True)
            write_landscape(out, rows)
            print(f"wrote {out} ({len(rows)} rows)")
    except (ConfigError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
