"""Command line entry point: ``horolab run <config>``, ``horolab list``, ``horolab verify-all``."""

from __future__ import annotations

import argparse
import sys
import time

from . import acceptance, catalog, runner
from .errors import UsageError


def _run(args):
    plan = runner.load_config(args.config)
    result = runner.run(plan, threads=runner.worker_count())
    print(result.summary)
    print(f"wrote {plan.output}")
    return result.exit_status


def _list(args):
    print(catalog.list_catalog())
    return 0


def _verify_all(args):
    t0 = time.perf_counter()
    results = acceptance.verify_all(out_dir=args.out, stream=sys.stdout)
    n_ok = sum(r.passed for r in results)
    print(f"{n_ok}/{len(results)} criteria passed in {time.perf_counter() - t0:.1f}s")
    return 0 if n_ok == len(results) else 1


def build_parser():
    parser = argparse.ArgumentParser(prog="horolab", description="Mean-value identity laboratory.")
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("run", help="execute the suites of a config file and write a CSV")
    p.add_argument("config")
    p.set_defaults(func=_run)
    p = sub.add_parser("list", help="list catalog manifolds, fields and suites")
    p.set_defaults(func=_list)
    p = sub.add_parser("verify-all", help="run the built-in acceptance criteria")
    p.add_argument("--out", default=None, help="directory for per-criterion CSV files")
    p.set_defaults(func=_verify_all)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"horolab: usage error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
