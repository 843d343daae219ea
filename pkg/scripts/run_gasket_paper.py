"""Gasket heat flow from the junction spline: d=3, m=6, T=1, N=2e5, explicit.

Writes snapshot CSVs at k = 0, 10, 100, 500 and N plus manifest and summary.
Pass --m 5 --N 20000 for the quick desk-scale version.
"""

import argparse
import sys

from sierpinski_fvm.cli import main as cli


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--out", default="out/gasket")
    p.add_argument("--m", type=int)
    p.add_argument("--N", type=int)
    args = p.parse_args()
    argv = ["simulate", "--preset", "gasket-paper", "--out", args.out]
    if args.m is not None:
        argv += ["--m", str(args.m)]
    if args.N is not None:
        argv += ["--N", str(args.N)]
    return cli(argv)


if __name__ == "__main__":
    sys.exit(main())
