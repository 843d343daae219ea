"""Tetrahedron heat flow: d=4, m=4, T=1, N=1e5, explicit, with both boundary modes."""

import argparse
import sys
from pathlib import Path

from sierpinski_fvm.cli import main as cli


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--out", default="out/tetra")
    args = p.parse_args()
    status = 0
    for mode in ("dirichlet-ghost", "neumann-cells"):
        status |= cli(["simulate", "--preset", "tetra-paper", "--boundary", mode,
                       "--out", str(Path(args.out) / mode)])
    return status


if __name__ == "__main__":
    sys.exit(main())
