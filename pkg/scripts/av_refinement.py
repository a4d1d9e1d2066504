"""A/V constants of the bundled fixtures under grid refinement.

Prints the continuous and discrete maximal ratios side by side, with the
ratio of the two constants, for every fixture, grid size and order.
Defect curves should blow up as the grid refines; smooth lifts should not.
"""

import argparse
import csv
import sys
import time

from heiswhitney.finiteness import equivalence_audit
from heiswhitney.modulus import ModulusOfContinuity
from heiswhitney.suite import defect_suite, smooth_suite


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[9, 17, 33])
    ap.add_argument("--orders", type=int, nargs="+", default=[1, 2, 3])
    ap.add_argument("--budget", type=int, default=5000)
    ap.add_argument("--csv", help="also write the table here")
    args = ap.parse_args()

    omega = ModulusOfContinuity.linear()
    rows = []
    print(f"{'fixture':<14} {'n':>4} {'m':>2} {'continuous':>12} {'discrete':>12} {'ratio':>8} {'sec':>6}")
    for curve in smooth_suite() + defect_suite():
        for n in args.sizes:
            for m in args.orders:
                t0 = time.perf_counter()
                cont, disc, ratio = equivalence_audit(curve.uniform_jets(n, m), omega, args.budget)
                dt = time.perf_counter() - t0
                rows.append((curve.name, n, m, cont.max_ratio, disc.max_ratio, ratio))
                print(f"{curve.name:<14} {n:>4} {m:>2} {cont.max_ratio:>12.4g} "
                      f"{disc.max_ratio:>12.4g} {ratio:>8.3g} {dt:>6.2f}")
                sys.stdout.flush()

    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["fixture", "n", "m", "continuous", "discrete", "ratio"])
            w.writerows(rows)

    # growth of the continuous constant between the coarsest and finest grids
    print()
    for name in dict.fromkeys(r[0] for r in rows):
        for m in args.orders:
            series = [r[3] for r in rows if r[0] == name and r[2] == m]
            if len(series) < 2:
                continue
            growth = series[-1] / series[0] if series[0] > 0 else float("nan")
            print(f"{name:<14} m={m}: x{growth:.3g} from n={args.sizes[0]} to n={args.sizes[-1]}")

if __name__ == "__main__":
    main()
