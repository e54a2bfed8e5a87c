"""``cspfolio`` command line: encode | features | run-solvers | evaluate | selftest."""

from __future__ import annotations

import argparse
import sys

from . import bench
from .features import DEFAULT_BUDGET
from .portfolio import PortfolioConfig, derive_seed


def _solver_spec(text: str) -> tuple[str, str]:
    name, sep, template = text.partition("=")
    if not sep or not name or not template:
        raise argparse.ArgumentTypeError(f"expected NAME=COMMAND, got {text!r}")
    return name, template


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cspfolio", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("encode", help="translate a CSP instance to DIMACS CNF")
    p.add_argument("input")
    p.add_argument("--encoding", choices=["direct", "support", "order"], default="direct")
    p.add_argument("--no-domains", action="store_true", help="omit domain clauses (ND variant)")
    p.add_argument("--format", choices=["native", "xcsp"], default=None,
                   help="input format (default: by file extension)")
    p.add_argument("--out", required=True)

    p = sub.add_parser("features", help="compute a feature CSV over a manifest")
    p.add_argument("manifest")
    p.add_argument("--kind", choices=["csp", "sat"], default="sat")
    p.add_argument("--encoding", choices=["direct", "support", "order", "all"], default="direct")
    p.add_argument("--no-domains", action="store_true")
    p.add_argument("--budget", type=int, default=DEFAULT_BUDGET, help="probing node budget")
    p.add_argument("--out", required=True, help="CSV path, or a directory with --encoding all")
    p.add_argument("--overhead", default=None, help="overhead sidecar CSV path")
    p.add_argument("--jobs", type=int, default=1)

    p = sub.add_parser("run-solvers", help="run external solvers and record runtimes")
    p.add_argument("manifest")
    p.add_argument("--solver", type=_solver_spec, action="append", required=True,
                   metavar="NAME=COMMAND", help="command template containing {instance}")
    p.add_argument("--timeout", type=float, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--grace", type=float, default=1.0, help="seconds between TERM and KILL")

    p = sub.add_parser("evaluate", help="cross-validate the portfolio and print the report")
    p.add_argument("--features", required=True)
    p.add_argument("--runtimes", required=True)
    p.add_argument("--timeout", type=float, required=True)
    p.add_argument("--labels", default=None, help="manifest or instance,family CSV")
    p.add_argument("--overhead", default=None)
    p.add_argument("--folds", type=int, default=10)
    p.add_argument("--par", type=float, default=10.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--min-cluster-size", type=int, default=10)
    p.add_argument("--max-k", type=int, default=10)
    p.add_argument("--model-out", default=None, help="also train on all data and save the model")
    p.add_argument("--out", default=None, help="write the report here as well")

    p = sub.add_parser("selftest", help="check encodings against brute-force solution counts")
    p.add_argument("-n", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--mutant", choices=sorted(bench.MUTANTS), default=None,
                   help=argparse.SUPPRESS)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "encode":
        return bench.cmd_encode(args.input, args.encoding, not args.no_domains, args.out,
                                args.format)
    if args.command == "features":
        return bench.cmd_features(args.manifest, args.kind, args.encoding, not args.no_domains,
                                  args.budget, args.out, args.overhead, args.jobs)
    if args.command == "run-solvers":
        return bench.cmd_run_solvers(args.manifest, dict(args.solver), args.timeout, args.out,
                                     args.jobs, args.grace)
    if args.command == "evaluate":
        config = PortfolioConfig(args.min_cluster_size, args.max_k, args.par,
                                 derive_seed(args.seed, "portfolio"))
        try:
            report = bench.cmd_evaluate(args.features, args.runtimes, args.timeout, args.labels,
                                        args.overhead, args.folds, config, args.model_out)
        except (OSError, ValueError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 2
        sys.stdout.write(report)
        if args.out:
            with open(args.out, "w") as fh:
                fh.write(report)
        return 0
    if args.command == "selftest":
        return bench.cmd_selftest(args.n, args.seed, args.mutant)
    return 2


if __name__ == "__main__":
    sys.exit(main())
