"""Closed recoveries on several base curves: energy split, closure and crossings.

Usage: python scripts/closed_shapes.py --eps 1e-3,1e-4,1e-5 --omega 0.25:+1
"""

import argparse
import csv
import sys

from elastica_lab.experiments import _base_curve, parse_omega
from elastica_lab.geometry import count_self_intersections
from elastica_lab.recovery_closed import as_path, build_closed_recovery, default_samples


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--eps", default="1e-3,1e-4,1e-5")
    p.add_argument("--omega", default="0.25:+1")
    p.add_argument("--shapes", default="circle,ellipse,limacon")
    p.add_argument("--align", default="tangent", choices=["tangent", "basepoint"])
    args = p.parse_args(argv)
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["shape", "epsilon", "lambda", "curvature_term", "excess_term", "total", "closure", "crossings"])
    for name in args.shapes.split(","):
        base = _base_curve(name)
        ell = as_path(base).length
        omega = parse_omega(args.omega, ell)
        for eps in (float(x) for x in args.eps.split(",")):
            rec = build_closed_recovery(base, omega, eps, align=args.align)
            n = default_samples(ell, eps, omega.count)
            ce, _ = rec.sample(n)
            rep = rec.energy(n)
            w.writerow([name, eps, f"{rec.report.lam:.17g}", f"{rep.curvature_term:.17g}",
                        f"{rep.excess_term:.17g}", f"{rep.total:.17g}", f"{rec.report.closure_gap:.3e}",
                        count_self_intersections(ce)])


if __name__ == "__main__":
    main()
