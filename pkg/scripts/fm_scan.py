"""Scan posterior normalizability over a (m, xbar) grid.

Prints a CSV table of verdicts for a family and prior; useful for locating
the boundaries of the sets F_m.
"""
import argparse
import csv
import sys

import numpy as np

from xmdl import expfam, measures


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--family", default="exponential")
    ap.add_argument("--prior", default="exp-inv-sq")
    ap.add_argument("--m-max", type=int, default=8)
    ap.add_argument("--xbar-min", type=float, default=0.02)
    ap.add_argument("--xbar-max", type=float, default=2.0)
    ap.add_argument("--points", type=int, default=40)
    args = ap.parse_args()

    F = expfam.get_family(args.family)
    prior = measures.get_prior(args.prior, F)
    xs = np.linspace(args.xbar_min, args.xbar_max, args.points)
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["m", "xbar", "verdict"])
    for m in range(1, args.m_max + 1):
        finite = []
        for x in xs:
            v = measures.in_Fm(prior, F, m, float(x))
            w.writerow([m, f"{x:.6g}", v.value])
            if v.value == "finite":
                finite.append(x)
        lo = f"{min(finite):.4g}" if finite else "none"
        print(f"# m={m}: smallest finite grid point {lo}", file=sys.stderr)


if __name__ == "__main__":
    main()
