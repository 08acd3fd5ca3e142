"""Command-line driver.

Exit status: 0 success, 1 usage or config error, 2 runtime failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import logging
import os
import sys
from pathlib import Path

from .engine import SweepConfig, run_sweep
from .io import ConfigError, format_csv, load_config, serialize_config, write_csv
from .plot import render_plot
from .schemes import Scheme, SchemeConfig

log = logging.getLogger("udnsim")

SEED_ENV = "UDNSIM_SEED"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}\n{self.format_usage()}")


def _csv_floats(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _csv_names(text: str) -> tuple[str, ...]:
    return tuple(v.strip().upper().replace("-", "_") for v in text.split(",") if v.strip())


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="udnsim", description="Sum-rate Monte Carlo for ultra-dense mmWave small cells.")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    sub.required = True

    run = sub.add_parser("run", help="run a density sweep")
    run.add_argument("--config", type=Path, help="config file")
    run.add_argument("--densities", type=_csv_floats, help="SBS densities per km^2, e.g. 10,50,100")
    run.add_argument("--trials", type=int, help="random topologies per density")
    run.add_argument("--seed", type=int, help=f"base seed (fallback: ${SEED_ENV})")
    run.add_argument("--schemes", type=_csv_names, help="e.g. OMA_HD,NOMA_HD,NOMA_FD")
    run.add_argument("--out", type=Path, help="CSV output path (default: stdout)")
    run.add_argument("--plot", type=Path, help="SVG plot path")
    run.add_argument("--workers", type=int, default=1, help="worker processes")

    val = sub.add_parser("validate", help="parse a config and print its normalized form")
    val.add_argument("config", type=Path)

    sub.add_parser("defaults", help="print the default config")
    return p


def _read_config(path: Path | None):
    if path is None:
        return load_config("")
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc.strerror or exc}") from None
    try:
        return load_config(text)
    except ConfigError as exc:
        raise UsageError(f"{path}: {exc}") from None


def resolve_config(args) -> SweepConfig:
    """Merge defaults, the config file and command-line flags (flags win)."""
    cfg, explicit = _read_config(args.config)
    changes = {}
    if args.densities is not None:
        changes["densities"] = args.densities
    if args.trials is not None:
        changes["trials"] = args.trials
    if args.seed is not None:
        changes["base_seed"] = args.seed
    elif ("sweep", "seed") not in explicit and os.environ.get(SEED_ENV):
        try:
            changes["base_seed"] = int(os.environ[SEED_ENV])
        except ValueError:
            raise UsageError(f"${SEED_ENV} is not an integer: {os.environ[SEED_ENV]!r}") from None
    if args.schemes is not None:
        current = {s.scheme: s for s in cfg.schemes}
        try:
            changes["schemes"] = tuple(current.get(Scheme(n)) or SchemeConfig(Scheme(n))
                                       for n in args.schemes)
        except ValueError as exc:
            raise UsageError(f"--schemes: {exc}") from None
    if args.workers < 1:
        raise UsageError("--workers must be at least 1")
    try:
        return dataclasses.replace(cfg, **changes)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _run(args) -> int:
    cfg = resolve_config(args)
    log.info("sweep: %d densities x %d trials, seed %d", len(cfg.densities), cfg.trials,
             cfg.base_seed)
    result = run_sweep(cfg, workers=args.workers)
    if args.out:
        write_csv(result, args.out)
        log.info("wrote %s", args.out)
    else:
        sys.stdout.write(format_csv(result))
    if args.plot:
        render_plot(result, args.plot)
        log.info("wrote %s", args.plot)
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                            format="%(levelname)s %(name)s: %(message)s")
        if args.command == "defaults":
            sys.stdout.write(serialize_config(SweepConfig()))
            return 0
        if args.command == "validate":
            cfg, _ = _read_config(args.config)
            sys.stdout.write(serialize_config(cfg))
            return 0
        return _run(args)
    except UsageError as exc:
        print(str(exc).rstrip(), file=sys.stderr)
        return 1
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    except Exception as exc:  # noqa: BLE001
        print(f"udnsim: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
