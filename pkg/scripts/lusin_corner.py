"""Lusin approximation of the corner curve f = |t - 1/2|, g = t^2.

For each sampling density and measure target, report the discarded
measure, where the non-margin discards sit, and the sup distance between
the approximant and the samples on the retained cells.
"""

import argparse
import time

import numpy as np

from heiswhitney.errors import CoverageError
from heiswhitney.lusin import lusin_approximate
from heiswhitney.suite import circle_lift, corner_curve


def describe(res, corner):
    bad = res.defect_cells()
    if not bad:
        return "none"
    lo = min(c[0] for c in bad)
    hi = max(c[1] for c in bad)
    return f"[{lo:.4f}, {hi:.4f}] ({len(bad)} cells, corner at {corner})"


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--points", type=int, nargs="+", default=[4097, 8193])
    ap.add_argument("--epsilons", type=float, nargs="+", default=[0.2, 0.1, 0.05])
    ap.add_argument("--cells", type=int, default=150)
    ap.add_argument("--control", action="store_true", help="run the circle lift as well")
    args = ap.parse_args()

    curves = [corner_curve()] + ([circle_lift()] if args.control else [])
    for curve in curves:
        print(f"== {curve.name}")
        for n in args.points:
            samples = curve.sample(np.linspace(0, 1, n))
            for eps in args.epsilons:
                t0 = time.perf_counter()
                try:
                    res = lusin_approximate(samples, 1, epsilon=eps, cells=args.cells)
                except CoverageError as exc:
                    print(f"n={n:<6} eps={eps:<5} coverage failed: {exc}")
                    continue
                dt = time.perf_counter() - t0
                print(f"n={n:<6} eps={eps:<5} deficit={res.agreement_measure_deficit:.4f} "
                      f"margin={res.margin_measure:.4f} sup_err={res.agreement_error:.2e} "
                      f"|K|={len(res.K):<4} defects={describe(res, 0.5)} ({dt:.1f}s)")


if __name__ == "__main__":
    main()
