"""Command line entry point: ``edlab run | sweep | list-builtins``.

Reports go to standard output and diagnostics to standard error. Exit codes:
0 when every checked margin is within tolerance, 1 for usage or resolution
errors and 2 when a margin is violated.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .exceptions import EdlabError
from .scenario import (
    BUILTINS,
    FORMATS,
    MODES,
    SweepConfig,
    builtin_scenarios,
    emit,
    load_scenarios,
    run_scenario,
    run_sweep,
)

EXIT_OK, EXIT_ERROR, EXIT_VIOLATION = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_ERROR)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="edlab", description="Error-disturbance relations on block algebras.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    run = sub.add_parser("run", help="evaluate the scenarios of a YAML file or a builtin name")
    run.add_argument("file", help="scenario file, or the name of a builtin scenario")
    run.add_argument("--format", choices=FORMATS, default="text")
    run.add_argument("--tolerance", type=float, default=None,
                     help="margin tolerance overriding the scenario values")

    sw = sub.add_parser("sweep", help="seeded random sweep")
    sw.add_argument("--seed", type=int, required=True)
    sw.add_argument("--count", type=int, required=True)
    sw.add_argument("--dim-max", type=int, default=4)
    sw.add_argument("--outcomes-max", type=int, default=5)
    sw.add_argument("--kraus-rank", type=int, default=2)
    sw.add_argument("--subalgebras", action="store_true",
                    help="also sample proper block subalgebras")
    sw.add_argument("--mode", choices=MODES, default="error_disturbance")
    sw.add_argument("--tolerance", type=float, default=None)
    sw.add_argument("--jobs", type=int, default=1, help="worker processes")
    sw.add_argument("--format", choices=FORMATS, default="text")

    sub.add_parser("list-builtins", help="list the shipped scenarios")
    return p


def _write(data: bytes) -> None:
    sys.stdout.buffer.write(data)
    sys.stdout.flush()


def _cmd_run(args) -> int:
    path = Path(args.file)
    if not path.exists() and args.file in BUILTINS:
        scenarios = builtin_scenarios(args.file, args.tolerance)
    elif not path.exists():
        print(f"edlab: no such file or builtin: {args.file}", file=sys.stderr)
        return EXIT_ERROR
    else:
        scenarios = load_scenarios(path, args.tolerance)
    reports = [run_scenario(s) for s in scenarios]
    _write(emit(reports, args.format))
    bad = [r.name for r in reports if not r.passed]
    for name in bad:
        print(f"edlab: margin violated in {name}", file=sys.stderr)
    return EXIT_VIOLATION if bad else EXIT_OK


def _cmd_sweep(args) -> int:
    kwargs = {}
    if args.tolerance is not None:
        kwargs["tolerance"] = args.tolerance
    cfg = SweepConfig(seed=args.seed, count=args.count, dim_max=args.dim_max,
                      outcomes_max=args.outcomes_max, kraus_rank=args.kraus_rank,
                      subalgebras=args.subalgebras, mode=args.mode, **kwargs)
    result = run_sweep(cfg, jobs=args.jobs)
    _write(emit(result.reports, args.format, summary=result.summary))
    failed = result.summary["failed"]
    if failed:
        print(f"edlab: {failed} scenario(s) violated a margin", file=sys.stderr)
    return EXIT_VIOLATION if failed else EXIT_OK


def _cmd_list() -> int:
    width = max(len(n) for n in BUILTINS)
    for name, (desc, _) in BUILTINS.items():
        print(f"{name:<{width}}  {desc}")
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "sweep":
            return _cmd_sweep(args)
        return _cmd_list()
    except (EdlabError, OSError) as err:
        print(f"edlab: {err}", file=sys.stderr)
        return EXIT_ERROR
    except Exception as err:  # yaml errors and the like
        print(f"edlab: {type(err).__name__}: {err}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
