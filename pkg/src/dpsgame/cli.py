"""Command-line runner: one JSON scenario in, one CSV out.

Exit status is 0 on success, 2 for a bad scenario file or flags, and 3 when
a solver fails hard (no convergence, exhausted bracket, singular system).
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import __version__
from .config import MODES, ConfigError, load_config
from .csvout import render
from .errors import DPSError, HypothesisError, InstabilityError
from .experiments import RUNNERS
from .sim import RNG_ALGORITHM

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER = 0, 2, 3

log = logging.getLogger("dpsgame")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _u64(text: str) -> int:
    v = int(text, 0)
    if not 0 <= v < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="dpsgame", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="mode", required=True, parser_class=_Parser)
    for mode in MODES:
        s = sub.add_parser(mode, help=f"run a {mode} scenario")
        s.add_argument("--config", required=True, help="JSON scenario file")
        s.add_argument("--out", help="output CSV path (default: stdout)")
        s.add_argument("--seed", type=_u64, help="override the scenario seed")
        s.add_argument("--threads", type=_positive, default=1, help="worker processes (default 1)")
        s.add_argument("-v", "--verbose", action="store_true")
    return p


def run(mode: str, config_path: str, seed: int | None = None, threads: int = 1) -> str:
    """Execute one scenario and return the CSV text."""
    cfg = load_config(config_path, mode, seed)
    columns, rows = RUNNERS[mode](cfg, threads)
    meta = {"tool": "dpsgame", "version": __version__, "mode": mode,
            "config_sha256": cfg.digest, "seed": cfg.seed, "rng": RNG_ALGORITHM}
    return render(columns, rows, meta)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        text = run(args.mode, args.config, args.seed, args.threads)
    except (ConfigError, InstabilityError, HypothesisError) as exc:
        print(f"dpsgame: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DPSError, ArithmeticError) as exc:
        print(f"dpsgame: solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except ValueError as exc:
        # parameter validation deeper in the stack
        print(f"dpsgame: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8", newline="\n")
        log.info("wrote %s", args.out)
    else:
        sys.stdout.write(text)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
