"""Command-line benchmark harness.

Usage::

    asdm-bench run --problem steepquad --rule 1 --x0 1 --output trace.csv
    asdm-bench run --config runs.ini --section steep --beta 0.3
    asdm-bench compare --config runs.ini --output table.csv --plot-data gaps.csv
    asdm-bench compare --problem quad1d --solvers ASDM,FixedStep
    asdm-bench problems

Exit codes: 0 success, 1 configuration error, 2 backtracking exhausted,
3 audit failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from typing import Dict, List, Optional

from . import bench
from .errors import ConfigurationError, ObjectiveDomainError
from .problems import REGISTRY, SUITE

FLAG_KEYS = (
    "problem",
    "solver",
    "rule",
    "beta",
    "eps0",
    "v",
    "grad_tol",
    "max_iters",
    "i_cap",
    "x0",
    "seed",
    "output",
    "format",
    "spectrum",
    "b",
    "center",
)


def _add_run_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="key=value config file with one [section] per run")
    p.add_argument("--problem", help=f"problem id ({', '.join(sorted(REGISTRY))})")
    p.add_argument("--solver", choices=bench.SOLVERS)
    p.add_argument("--rule", choices=["1", "2"])
    p.add_argument("--beta")
    p.add_argument("--eps0")
    p.add_argument("--v")
    p.add_argument("--grad-tol", dest="grad_tol")
    p.add_argument("--max-iters", dest="max_iters")
    p.add_argument("--i-cap", dest="i_cap")
    p.add_argument("--x0", help="comma-separated start point")
    p.add_argument("--seed")
    p.add_argument("--format", choices=bench.FORMATS)
    p.add_argument("--spectrum", help="eigenvalues for the 'quad' problem")
    p.add_argument("--b", help="linear term for the 'quad' problem")
    p.add_argument("--center", help="center for 'lse' and 'fractional-ball'")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="asdm-bench", description="Adaptive steepest descent benchmark harness")
    parser.add_argument("-q", "--quiet", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="execute and audit one run")
    _add_run_flags(run)
    run.add_argument("--section", help="config section to run (default: the only one)")
    run.add_argument("--output", help="artifact path (csv trace or json report)")

    cmp_ = sub.add_parser("compare", help="compare solvers on one problem")
    _add_run_flags(cmp_)
    cmp_.add_argument("--solvers", help="comma-separated solvers when no config file is given")
    cmp_.add_argument("--output", help="write the comparison table as CSV")
    cmp_.add_argument("--plot-data", dest="plot_data", help="write long-format (solver, k, gap) CSV")

    sub.add_parser("problems", help="list problem ids")
    return parser


def _overrides(args) -> Dict[str, str]:
    return {k: getattr(args, k) for k in FLAG_KEYS if getattr(args, k, None) is not None}


def _run(args) -> int:
    overrides = _overrides(args)
    if args.config:
        configs = bench.read_config_file(args.config, overrides)
        if args.section:
            configs = [c for c in configs if c.name == args.section]
            if not configs:
                raise ConfigurationError(f"no section {args.section!r} in {args.config}")
        elif len(configs) > 1:
            raise ConfigurationError("config has several sections; pick one with --section")
        config = configs[0]
    else:
        config = bench.config_from_mapping(overrides)
    report = bench.run_config(config)
    if not args.quiet:
        s = report.summary(include_records=False)
        print(f"{s['problem_id']} {s['label']}: {s['status']} after {s['iterations']} iterations, "
              f"f={s['final_f']!r}, fevals={s['fevals']}, gevals={s['gevals']}")
        print(json.dumps(s["audit"], indent=1))
    return report.exit_code


def _compare(args) -> int:
    overrides = _overrides(args)
    overrides.pop("output", None)
    if args.config:
        configs = bench.read_config_file(args.config, overrides)
    else:
        if not args.solvers:
            raise ConfigurationError("compare needs --config or --solvers")
        configs = []
        for solver in args.solvers.split(","):
            solver, _, rule = solver.strip().partition(":")
            vals = dict(overrides, solver=solver)
            if rule:
                vals["rule"] = rule
            configs.append(bench.config_from_mapping(vals))
    rows, reports = bench.compare(configs)
    if not args.quiet:
        print(bench.format_table(rows))
    if args.output:
        bench.write_atomic(args.output, bench.comparison_csv(rows))
    if args.plot_data:
        bench.write_atomic(args.plot_data, bench.gap_long_csv(rows, reports))
    return max(r.exit_code for r in reports)


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.ERROR if args.quiet else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        if args.command == "problems":
            for pid in sorted(REGISTRY):
                print(pid + ("  (suite)" if pid in SUITE else ""))
            return bench.EXIT_OK
        if args.command == "run":
            return _run(args)
        return _compare(args)
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return bench.EXIT_CONFIG
    except (ObjectiveDomainError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return bench.EXIT_CONFIG if isinstance(exc, OSError) else bench.EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
