"""Gap-size schedule c_m for the truncated C-infinity extension.

Shows the constants built from unit A/V constants and from the ones
measured on a fixture, then runs the extension and tallies which order
each gap was repaired at.
"""

import argparse
from collections import Counter

from heiswhitney.extension import ExtensionConstants, extend_cinfty
from heiswhitney.suite import circle_lift, cubic_lift, tilted_circle

FIXTURES = {"circle": circle_lift, "cubic": cubic_lift, "tilted": tilted_circle}


def show(cons, label):
    print(f"-- {label}")
    print(f"{'m':>2} {'kappa':>10} {'C':>11} {'C_prime':>11} {'c':>11}")
    for m in range(cons.m_max + 1):
        print(f"{m:>2} {cons.kappa[m]:>10.4g} {cons.C[m]:>11.4g} "
              f"{cons.C_prime[m]:>11.4g} {cons.c[m]:>11.4g}")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--fixture", choices=sorted(FIXTURES), default="circle")
    ap.add_argument("--points", type=int, nargs="+", default=[9, 17])
    ap.add_argument("--m-max", type=int, default=4)
    args = ap.parse_args()

    show(ExtensionConstants.from_kappas([1.0] * (args.m_max + 1), 1.0), "unit kappas")
    curve = FIXTURES[args.fixture]()
    for n in args.points:
        gamma = curve.uniform_jets(n, args.m_max)
        out = extend_cinfty(gamma, m_max=args.m_max, av_limit=None)
        show(out.constants, f"{curve.name}, {n} points")
        tally = Counter((r.order, r.case, r.guard_applied) for r in out.repairs.values())
        for (order, case, guarded), count in sorted(tally.items()):
            print(f"   order {order} {case:<9} guard={guarded}: {count} gaps")
        a = out.audit
        print(f"   residual {a['residual_max']:.2e}  jet match {a['jet_match_abs']:.2e}")


if __name__ == "__main__":
    main()
