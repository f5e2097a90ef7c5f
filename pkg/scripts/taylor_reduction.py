"""Check the local reduction of a narrow exchange kernel.

A radial kernel k of shrinking support acts on a smooth spin field like
c0 M(x) + alpha (Lap M)(x) with alpha = (1/2d) int k(|z|)|z|^2 dz.  This
prints the worst probe-point residual against the Laplacian-term scale
for a sequence of radii; the ratio should fall roughly like radius^2.
"""

import argparse
import sys

from spinsemi.meanfield import cosine_bump, exchange_taylor_residual, spin_wave_field


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--amplitude", default=1.0, type=float)
    parser.add_argument(
        "--radii", default=(0.4, 0.2, 0.1, 0.05), type=float, nargs="+"
    )
    parser.add_argument("--probes", default=7, type=int)
    args = parser.parse_args(argv)

    field = spin_wave_field(((0.0, 1.0),))
    print(f"{'radius':>8}  {'residual':>12}  {'lap scale':>12}  {'ratio':>10}")
    prev = None
    for radius in args.radii:
        kernel = cosine_bump(radius, args.amplitude)
        residual, scale = exchange_taylor_residual(
            kernel, radius, field, n_probe=args.probes
        )
        ratio = residual / scale if scale else float("inf")
        print(f"{radius:8.3f}  {residual:12.4e}  {scale:12.4e}  {ratio:10.4e}")
        if prev is not None and ratio >= prev:
            print("warning: residual ratio did not shrink with the radius")
        prev = ratio
    return 0


if __name__ == "__main__":
    sys.exit(main())
