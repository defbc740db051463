"""Command line entry point: ``pbitsim <command> ...``.

Exit codes: 0 success, 1 config error, 2 verification failure, 3 runtime failure.
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import harness, network
from .verify import verify

EXIT_OK, EXIT_CONFIG, EXIT_VERIFY, EXIT_RUNTIME = 0, 1, 2, 3


def _load(path, args) -> harness.ExperimentConfig:
    cfg = harness.ExperimentConfig.from_file(path)
    if args.workers is not None:
        cfg.workers = args.workers
    if args.output is not None:
        cfg.output = args.output
    return cfg


def _emit(rows, cfg) -> None:
    if cfg.output:
        harness.write_csv(rows, cfg.output)
    else:
        sys.stdout.write(harness.rows_to_csv(rows))


def cmd_run(args) -> int:
    cfg = _load(args.config, args)
    _emit(harness.run_experiment(cfg), cfg)
    return EXIT_OK


def cmd_sweep(args) -> int:
    cfg = _load(args.config, args)
    _emit(harness.run_all_sweeps(cfg), cfg)
    return EXIT_OK


def cmd_compare(args) -> int:
    cfg = _load(args.config, args)
    pairs = harness.compare_schedules(cfg)
    _emit([row for pair in pairs for row in pair], cfg)
    return EXIT_OK


def cmd_verify(args) -> int:
    fa = None
    if args.full_adder:
        fa = network.load_network(Path(args.full_adder).read_text(), name="full_adder")
    results = verify(fa)
    for r in results:
        print(f"{'PASS' if r.passed else 'FAIL'}  {r.name:28s} {r.detail}")
    return EXIT_OK if all(r.passed for r in results) else EXIT_VERIFY


def cmd_networks(args) -> int:
    if args.action == "list":
        for name in network.BUILDERS:
            print(name)
        return EXIT_OK
    if not args.name:
        raise harness.ConfigError(f"'networks {args.action}' needs a network name")
    params = dict(kv.split("=", 1) for kv in args.param)
    params = {k: float(v) if "." in v else int(v) for k, v in params.items()}
    try:
        net = network.build(args.name, **params)
    except (TypeError, ValueError) as exc:
        raise harness.ConfigError(str(exc)) from None
    if args.action == "export":
        text = network.save_network(net)
        if args.output:
            Path(args.output).write_text(text)
        else:
            sys.stdout.write(text)
        return EXIT_OK
    print(f"{net.name}: n={net.n} kind={net.kind.value} edges={int(np.count_nonzero(net.j))}")
    problems = network.validate(net)
    print("valid" if not problems else "violations: " + "; ".join(problems))
    with np.printoptions(linewidth=200, precision=3, suppress=True):
        print("J =")
        print(net.j)
        print("h =", net.h)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pbitsim", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, func, help_ in (
        ("run", cmd_run, "run the configured sweep"),
        ("sweep", cmd_sweep, "run the configured network through every distortion kind"),
        ("compare-schedules", cmd_compare, "fixed kappa vs annealing on the configured sweep"),
    ):
        p = sub.add_parser(name, help=help_)
        p.add_argument("config", help="JSON experiment config")
        p.add_argument("-o", "--output", help="CSV path (overrides config; default stdout)")
        p.add_argument("-j", "--workers", type=int, help="worker processes")
        p.set_defaults(func=func)
    p = sub.add_parser("verify", help="run the brute-force and statistical oracles")
    p.add_argument("--full-adder", help="check this network file instead of the built-in full adder")
    p.set_defaults(func=cmd_verify)
    p = sub.add_parser("networks", help="list, show or export built-in networks")
    p.add_argument("action", choices=("list", "show", "export"))
    p.add_argument("name", nargs="?")
    p.add_argument("param", nargs="*", help="builder parameters as key=value")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_networks)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except harness.ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001
        print(f"runtime failure: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
