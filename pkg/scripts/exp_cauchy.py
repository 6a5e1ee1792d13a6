"""Tabulate the exponentiated-Cauchy mixture family in the L = -ln|beta| coordinate.

Columns: L, beta, Z(beta), log mean, scaled Fisher information with its
analytic lower bound, and D(Q_beta || Q), which stays below ln 2.
"""
import argparse
import csv
import math
import sys

import numpy as np

from xmdl import jeffreys


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--L-min", type=float, default=-30)
    ap.add_argument("--L-max", type=float, default=30)
    ap.add_argument("--points", type=int, default=61)
    args = ap.parse_args()

    model = jeffreys.build_exp_cauchy().params["model"]
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["L", "beta", "Z", "log_mean", "scaled_fisher", "fisher_bound", "D_to_base"])
    for L in np.linspace(args.L_min, args.L_max, args.points):
        L = float(L)
        w.writerow([f"{L:.4g}", f"{model.beta(L):.6g}", f"{model.Z(L):.12f}", f"{model.log_mean(L):.6g}",
                    f"{model.scaled_fisher(L):.6g}", f"{model.fisher_lower_bound(L):.3g}",
                    f"{model.divergence_to_base(L):.12f}"])
    print(f"# D(delta_0 || Q) = {model.point_mass_divergence_to_base():.15f}, ln 2 = {math.log(2):.15f}",
          file=sys.stderr)
    for m in (1, 5, 20):
        r = model.conditional_jeffreys(m, 1.0)
        print(f"# conditional Jeffreys integral, m={m}, xbar=1: {r.verdict.value}", file=sys.stderr)


if __name__ == "__main__":
    main()
