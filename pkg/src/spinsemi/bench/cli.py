"""Command-line entry point for convergence-rate experiments.

Usage:
    spinsemi <mode> --config experiment.toml --out results/ [--seed N] [--threads N]

Modes: large-spin, coherent, mean-field, classical.  Exit codes: 0 success,
2 configuration problem, 3 dimension or order cap exceeded, 4 series
convergence radius violated, 5 I/O failure.
"""

from __future__ import annotations

import argparse
import sys

from ..errors import CapError, ConfigError, RadiusError
from .emit import emit
from .run import run
from .spec import MODES, load_spec


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spinsemi",
        description="convergence-rate experiments for spin dynamics",
    )
    sub = parser.add_subparsers(dest="mode", required=True)
    help_lines = {
        "large-spin": "Egorov gap versus spin magnitude s",
        "coherent": "coherent-state expectation gap versus s",
        "mean-field": "Egorov gap versus grid spacing h",
        "classical": "integrator self-convergence versus step dt",
    }
    for mode in MODES:
        p = sub.add_parser(mode, help=help_lines[mode])
        p.add_argument("--config", required=True, help="TOML experiment file")
        p.add_argument("--out", required=True, help="output directory")
        p.add_argument("--seed", type=int, default=None, help="override the config seed")
        p.add_argument("--threads", type=int, default=1, help="sweep worker threads")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        spec = load_spec(args.config, args.mode, seed_override=args.seed)
        result = run(spec, threads=args.threads)
        title = f"{spec.mode} sweep, t = {spec.t:g}"
        paths = emit(result, args.out, spec.basename, title, spec.seed)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except CapError as exc:
        print(f"cap exceeded: {exc}", file=sys.stderr)
        return 3
    except RadiusError as exc:
        print(f"outside the series radius: {exc}", file=sys.stderr)
        return 4
    except OSError as exc:
        print(f"i/o failure: {exc}", file=sys.stderr)
        return 5
    if result.fit is not None:
        print(
            f"{spec.mode}: {len(result.rows)} points, slope {result.fit.slope:.3f}, "
            f"R^2 {result.fit.r_squared:.4f} -> {paths['csv']}"
        )
    else:
        print(f"{spec.mode}: {len(result.rows)} points, no fit ({result.fit_note}) -> {paths['csv']}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
