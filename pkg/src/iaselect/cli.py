"""Command-line entry point: ``iaselect run`` and ``iaselect flops``."""

from __future__ import annotations

import argparse
import logging
import sys

from .bench import ConfigError, emit_results, load_spec, run_experiment, with_overrides
from .exceptions import InvalidConfig, SearchSpaceTooLarge
from .flops import FLOP_MODELS, FlopParams

EXIT_CONFIG = 2
EXIT_CAPPED = 3


def _algorithms(text: str) -> list[str]:
    return [a.strip() for a in text.split(",") if a.strip()]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="iaselect", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run the Monte Carlo experiment and write CSVs")
    run.add_argument("--config", required=True)
    run.add_argument("--out", required=True)
    run.add_argument("--trials", type=int)
    run.add_argument("--seed", type=int)
    run.add_argument("--algorithms", type=_algorithms)
    run.add_argument("--threads", type=int, default=1,
                     help="worker processes; output does not depend on this")

    flops = sub.add_parser("flops", help="print the flop model for the config's users sweep")
    flops.add_argument("--config", required=True)
    flops.add_argument("--u-method", choices=["joint", "decoupled"])
    return parser


def _run(args) -> int:
    spec = with_overrides(load_spec(args.config), args.trials, args.seed, args.algorithms)
    records, aggregates = run_experiment(spec, workers=args.threads)
    paths = emit_results(records, aggregates, args.out, spec)
    flagged = sum(r.flagged for r in records)
    logging.info("%d trial records, %d flagged; wrote %s", len(records), flagged,
                 ", ".join(str(p) for p in paths.values()))
    return 0


def _flops(args) -> int:
    spec = load_spec(args.config)
    b = spec.base
    print("k_t,algorithm,flops")
    for k_t in spec.users_sweep:
        p = FlopParams(b.M, b.N, b.K, b.L, k_t, b.d_s, args.u_method)
        for alg in spec.algorithms:
            print(f"{k_t},{alg},{FLOP_MODELS[alg](p)}")
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return _run(args) if args.command == "run" else _flops(args)
    except (ConfigError, InvalidConfig) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SearchSpaceTooLarge as exc:
        print(f"refusing brute-force search: {exc}", file=sys.stderr)
        return EXIT_CAPPED


if __name__ == "__main__":
    sys.exit(main())
