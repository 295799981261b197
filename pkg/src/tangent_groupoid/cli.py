"""Command-line entry point: ``tgroupoid <experiment> [key=value ...]``."""
from __future__ import annotations

import argparse
import sys

from .experiments import KINDS, ConfigError, ExperimentError, build_config, parse_config_text, run_experiment
from .report import format_value


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="key = value configuration file")
    common.add_argument("--out", metavar="PATH", help="CSV output path")
    common.add_argument("--seed", type=int, metavar="U64", help="seed for randomized sweeps")
    common.add_argument("--tol", type=float, metavar="REAL", help="convergence tolerance")
    common.add_argument("--quiet", action="store_true", help="print only the summary line")
    common.add_argument("overrides", nargs="*", metavar="key=value", help="configuration overrides")

    parser = argparse.ArgumentParser(prog="tgroupoid", description="Tangent groupoid experiments.")
    sub = parser.add_subparsers(dest="kind", required=True, metavar="experiment")
    for kind in KINDS:
        sub.add_parser(kind, parents=[common], help=f"run the {kind} experiment")
    return parser


def _table(header, rows, limit: int = 40) -> str:
    cells = [list(header)] + [[format_value(v) for v in r] for r in rows[:limit]]
    widths = [max(len(row[i]) for row in cells) for i in range(len(header))]
    lines = ["  ".join(c.rjust(w) for c, w in zip(row, widths)) for row in cells]
    if len(rows) > limit:
        lines.append(f"... {len(rows) - limit} more rows")
    return "\n".join(lines)


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        settings = {}
        if args.config:
            with open(args.config, encoding="utf-8") as fh:
                settings.update(parse_config_text(fh.read()))
        for item in args.overrides:
            if "=" not in item:
                raise ConfigError(f"{item}: overrides must look like key=value")
            key, value = item.split("=", 1)
            settings[key.strip()] = value.strip()
        settings["kind"] = args.kind
        for key in ("out", "seed", "tol"):
            if getattr(args, key) is not None:
                settings[key] = str(getattr(args, key))
        summary = run_experiment(build_config(settings))
    except (ConfigError, ExperimentError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if not args.quiet:
        print(_table(summary.header, summary.table))
    print(summary.describe())
    return 0


if __name__ == "__main__":
    sys.exit(main())
