"""Relax a one-loop field at several resolutions and compare with the elastica.

Prints the final phase-field energy, the discrete TV of Phi, their gap (which
shrinks like h^2) and the profile distance for each node count.

Usage: python scripts/relax_resolution.py --eps 1e-3 --n 200,400,800,1600
"""

import argparse
import csv
import sys

from elastica_lab.relaxer import bump_state, minimize_open, profile_distance, state_energy


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--eps", type=float, default=1e-3)
    p.add_argument("--n", default="200,400,800,1600")
    p.add_argument("--L", type=float, default=1.0)
    p.add_argument("--loops", type=int, default=1)
    args = p.parse_args(argv)
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["n", "steps", "phase_field", "tv_phi", "gap", "profile_rms", "D"])
    for n in (int(x) for x in args.n.split(",")):
        traj = minimize_open(args.L, args.eps, bump_state(args.L, args.eps, n, args.loops))
        final = traj[-1]
        pf, lb = state_energy(final, args.L, args.eps)
        w.writerow([n, final.step, f"{pf:.17g}", f"{lb:.17g}", f"{pf - lb:.3e}",
                    f"{profile_distance(final, args.eps):.3e}", f"{final.D:.17g}"])


if __name__ == "__main__":
    main()
