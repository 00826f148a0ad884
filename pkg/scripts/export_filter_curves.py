#!/usr/bin/env python3
"""Export penalty and prox filter curves for a few bandwidths.

Writes one CSV per bandwidth with columns x, g(x), f(x) on a 1000-point
grid, ready for plotting.
"""

import argparse
from pathlib import Path

from graphlowrank.spectral import save_filter_curve_csv


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--bandwidths", type=float, nargs="+", default=[0.4])
    parser.add_argument("--gamma", type=float, default=1.0)
    parser.add_argument("--x-max", type=float, default=2.0)
    parser.add_argument("--out-dir", default="out/filter_curves")
    args = parser.parse_args()

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for b in args.bandwidths:
        path = out_dir / f"curve_b_{b}.csv"
        save_filter_curve_csv(path, b=b, gamma=args.gamma, x_max=args.x_max)
        print(f"wrote {path}")


if __name__ == "__main__":
    main()
