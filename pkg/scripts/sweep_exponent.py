"""Sweep the block exponent ``a`` and print the key-block energy terms.

Usage: python scripts/sweep_exponent.py --eps 1e-3,1e-4,1e-5 --a 0.3,0.375,0.45
"""

import argparse
import csv
import sys

from elastica_lab.energies import SIGMA
from elastica_lab.recovery_open import build_key_block, key_block_energy


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--eps", default="1e-2,1e-3,1e-4,1e-5")
    p.add_argument("--a", default="0.3,0.35,0.375,0.4,0.45")
    args = p.parse_args(argv)
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["a", "epsilon", "I", "II", "III", "G_eps", "rel_to_sigma"])
    for a in (float(x) for x in args.a.split(",")):
        for eps in (float(x) for x in args.eps.split(",")):
            I, II, III, G = key_block_energy(build_key_block(eps, a, n=257))
            w.writerow([a, eps, f"{I:.17g}", f"{II:.17g}", f"{III:.17g}", f"{G:.17g}", f"{G / SIGMA - 1:.6e}"])


if __name__ == "__main__":
    main()
