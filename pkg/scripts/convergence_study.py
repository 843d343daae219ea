"""Self-convergence tables for both schemes and a time-step refinement of the implicit one.

Every level starts from the level-1 junction spline extended harmonically, so
the initial data agree exactly after restriction and the table isolates the
error of the time evolution.
"""

import argparse
import math

import numpy as np

from sierpinski_fvm.analysis import self_convergence_study
from sierpinski_fvm.solver import SchemeConfig, run


def show(table):
    print(f"d={table.d} scheme={table.scheme} T={table.T} m_ref={table.m_ref} initial={table.initial}")
    print(f"{'m':>3} {'h':>12} {'error':>12} {'rate':>6}")
    for r in table.rows:
        rate = "" if math.isnan(r.rate) else f"{r.rate:6.2f}"
        print(f"{r.m:>3} {r.h:12.4e} {r.error:12.4e} {rate:>6} {r.message}")
    print(f"strictly decreasing: {table.strictly_decreasing}\n")


def time_refinement(d, m, T, steps):
    ends = [run(SchemeConfig(T, n, scheme="implicit", snapshot_steps=(n,)), "spline:1:1", d, m).values[-1]
            for n in steps]
    print(f"implicit time refinement, d={d} m={m} T={T}")
    for n, n2, a, b in zip(steps, steps[1:], ends, ends[1:]):
        print(f"  N={n:>6} -> {n2:<6} change {np.linalg.norm(a - b):.3e}")


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--d", type=int, default=3)
    p.add_argument("--levels", default="2,3,4")
    p.add_argument("--T", type=float, default=0.1)
    p.add_argument("--explicit", action="store_true", help="also run the explicit study (slower)")
    args = p.parse_args()
    levels = [int(v) for v in args.levels.split(",")]
    show(self_convergence_study(args.d, levels, scheme="implicit", T=args.T))
    if args.explicit:
        show(self_convergence_study(args.d, levels, scheme="explicit", T=args.T))
    time_refinement(args.d, 3, args.T, [100, 200, 400, 800])


if __name__ == "__main__":
    main()
