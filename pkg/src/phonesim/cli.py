"""Command line entry point: ``sweep`` and ``single``."""
from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import asdict, replace

from .config import ConfigError
from .runner import (ALGORITHMS, PARAM_ALIASES, SweepSpec, load_config, mix_seed,
                     point_config, run_algorithm, evaluate, run_sweep, write_csv,
                     write_metadata)
from .system_model import sample_channel

EXIT_OK, EXIT_CONFIG, EXIT_PARTIAL = 0, 2, 3


def _int_list(text: str) -> tuple:
    try:
        return tuple(int(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma list of integers: {text!r}") from None


def _name_list(text: str) -> tuple:
    return tuple(v.strip() for v in text.split(",") if v.strip())


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="phonesim")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    sw = sub.add_parser("sweep", help="Monte Carlo sweep over one parameter, written to CSV")
    sw.add_argument("--config", default=None)
    sw.add_argument("--param", choices=sorted(PARAM_ALIASES))
    sw.add_argument("--values", type=_int_list)
    sw.add_argument("--trials", type=int)
    sw.add_argument("--algorithms", type=_name_list)
    sw.add_argument("--seed", type=int)
    sw.add_argument("--out", required=True)
    sw.add_argument("--trace", default=None, help="JSON lines file with per-iteration traces")
    sw.add_argument("--workers", type=int, default=1)

    si = sub.add_parser("single", help="one channel draw, one algorithm")
    si.add_argument("--config", default=None)
    si.add_argument("--seed", type=int, default=0)
    si.add_argument("--algorithm", choices=ALGORITHMS, default="phone")
    return parser


def _sweep(args) -> int:
    cfg, spec = load_config(args.config)
    updates = {}
    if args.param is not None:
        updates["parameter"] = PARAM_ALIASES[args.param]
    if args.values is not None:
        updates["values"] = args.values
    elif args.param is not None:
        updates["values"] = (getattr(cfg, PARAM_ALIASES[args.param]),)
    if args.trials is not None:
        updates["trials"] = args.trials
    if args.algorithms is not None:
        updates["algorithms"] = args.algorithms
    if args.seed is not None:
        updates["base_seed"] = args.seed
    spec = replace(spec, **updates).validate(cfg)
    records = run_sweep(cfg, spec, workers=args.workers, trace_path=args.trace)
    write_csv(records, args.out)
    write_metadata(cfg, spec, args.out + ".meta.json")
    failed = sum(r.failed for r in records)
    if failed:
        print(f"{failed} of {len(records)} rows failed", file=sys.stderr)
        return EXIT_PARTIAL
    return EXIT_OK


def _single(args) -> int:
    cfg, _ = load_config(args.config)
    seed = mix_seed(args.seed)
    ch = sample_channel(cfg, seed)
    try:
        p, complexity, converged, _ = run_algorithm(args.algorithm, ch, cfg, seed)
    except Exception as err:
        print(f"{args.algorithm} failed: {err}", file=sys.stderr)
        return EXIT_PARTIAL
    rec = evaluate(ch, p, cfg, args.algorithm, complexity, converged,
                   "n_tx", cfg.n_tx, 0, seed)
    for key, value in asdict(rec).items():
        print(f"{key}={value!r}" if isinstance(value, float) else f"{key}={value}")
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return _sweep(args) if args.command == "sweep" else _single(args)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except FileNotFoundError as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
