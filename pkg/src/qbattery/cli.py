"""``qbattery`` command line: ``run``, ``sweep`` and ``compare``."""

from __future__ import annotations

import argparse
import logging
import sys

from . import harness
from .errors import ConfigurationError
from .model import reference_couplings


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(harness.EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _add_run_flags(p):
    p.add_argument("--config", help="flat key = value config file")
    p.add_argument("--scenario", choices=["I", "II", "III"], help="coupling scenario (default I)")
    p.add_argument("--example", choices=["a", "b"], help="a: incoherent start, b: coherent start")
    p.add_argument("--g", type=float, help="reservoir coupling (default 0.05 x omega_S2)")
    p.add_argument("--k", type=float, help="charger-battery coupling, scenario III (default 0.03 x omega_C)")
    p.add_argument("--t-max", dest="t_max", type=float, help="final time (default 60)")
    p.add_argument("--sample-dt", dest="sample_dt", type=float, help="output spacing (default 0.05)")
    p.add_argument("--tol", type=float, help="local error tolerance (default 1e-9)")
    p.add_argument("--out", help="CSV path for run, directory for sweep")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="qbattery", description="Structured-reservoir quantum battery charging runs.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p_run = sub.add_parser("run", help="integrate one configuration and write a CSV")
    _add_run_flags(p_run)

    p_sweep = sub.add_parser("sweep", help="run a set of couplings and report the g-trend")
    _add_run_flags(p_sweep)
    p_sweep.add_argument("--g-values", dest="g_values",
                         help="comma-separated couplings (default: 0.03,0.05,0.07,0.09 x omega_S2)")
    p_sweep.add_argument("--workers", type=int, help="parallel processes (default: CPU count)")

    p_cmp = sub.add_parser("compare", help="compare example a and b runs of one scenario")
    p_cmp.add_argument("run_a")
    p_cmp.add_argument("run_b")
    return parser


def _flags(args):
    keys = ("scenario", "example", "g", "k", "t_max", "sample_dt", "tol", "out")
    return {k: getattr(args, k) for k in keys}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "run":
            spec = harness.parse_config(args.config, **_flags(args))
            if isinstance(spec, harness.SweepSpec):
                raise harness.UsageError("config defines g_values; use the sweep command")
            result = harness.run(spec)
            print(f"{result.output_path}: {result.n_rows} rows, status {result.status}")
            if result.message:
                print(f"first failure at t={result.first_failure_time}: {result.message}")
            return result.status

        if args.command == "sweep":
            flags = _flags(args)
            flags["g_values"] = args.g_values
            spec = harness.parse_config(args.config, **flags)
            if isinstance(spec, harness.RunSpec):
                g_values = reference_couplings(spec.config.omega_S2)
                spec = harness.SweepSpec(spec, g_values, args.out or "sweep")
            report = harness.sweep(spec, workers=args.workers)
            print("\n".join(report.lines()))
            return max((r.status for r in report.results), default=harness.EXIT_OK)

        report = harness.compare_examples(args.run_a, args.run_b)
        print("\n".join(report.lines()))
        return harness.EXIT_OK
    except ConfigurationError as exc:
        print(f"qbattery: error: {exc}", file=sys.stderr)
        return harness.EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
