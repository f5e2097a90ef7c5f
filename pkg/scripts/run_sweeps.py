"""Run every sweep config in configs/ and write CSV/SVG/JSON triples.

Each file's [experiment] mode selects the pipeline; outputs land in the
chosen directory under the config's output basename.
"""

import argparse
import sys
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:
    import tomli as tomllib

from spinsemi.bench import emit, load_spec, run


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument(
        "--configs", default=Path(__file__).resolve().parent.parent / "configs",
        type=Path, help="directory of TOML sweep configs",
    )
    parser.add_argument("--out", default=Path("results"), type=Path)
    parser.add_argument("--threads", default=1, type=int)
    parser.add_argument("--seed", default=None, type=int, help="override every config's seed")
    args = parser.parse_args(argv)

    paths = sorted(args.configs.glob("*.toml"))
    if not paths:
        print(f"no configs found in {args.configs}", file=sys.stderr)
        return 2
    for path in paths:
        with open(path, "rb") as fh:
            mode = tomllib.load(fh).get("experiment", {}).get("mode")
        if mode is None:
            print(f"{path.name}: no experiment.mode, skipped", file=sys.stderr)
            continue
        spec = load_spec(str(path), mode, seed_override=args.seed)
        result = run(spec, threads=args.threads)
        written = emit(
            result,
            str(args.out),
            spec.basename,
            title=f"{mode} sweep, t = {spec.t:g}",
            seed=spec.seed,
        )
        if result.fit is not None:
            note = f"slope {result.fit.slope:.3f}, R^2 {result.fit.r_squared:.4f}"
        else:
            note = f"no fit ({result.fit_note})"
        print(f"{path.name}: {len(result.rows)} points, {note} -> {written['csv']}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
