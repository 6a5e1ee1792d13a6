"""Regret-2 gap against horizon for several predictors, averaged over seeds.

Prints CSV (family, system, n, mean_gap, std_gap, target) and writes it to
--out when given.  The target is the limit of the gap for Jeffreys mixtures.
"""
import argparse
import csv
import math
import sys

import numpy as np

from xmdl import expfam, predict


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--family", default="bernoulli")
    ap.add_argument("--systems", default="jeffreys,snml,plugin")
    ap.add_argument("--m", type=int, default=0)
    ap.add_argument("--mu", type=float)
    ap.add_argument("--max-n", type=int, default=1 << 14)
    ap.add_argument("--seeds", type=int, default=8)
    ap.add_argument("--out")
    args = ap.parse_args()

    F = expfam.get_family(args.family)
    mu = F.anchor_mean if args.mu is None else args.mu
    hs = [h for h in (2 ** k for k in range(2, 40)) if max(args.m, 1) <= h <= args.max_n]
    prefix = list(predict.iid_generator(F, mu, 0)(args.m)) if args.m else None
    target = predict.regret_gap_target(F, args.m, prefix)["gap_limit"]
    rows = []
    for sid in args.systems.split(","):
        system = predict.get_system(sid, F, horizon=hs[-1], m=args.m)
        gaps = np.array([[r.gap for r in predict.regret_gap_experiment(
            system, predict.iid_generator(F, mu, s), args.m, hs, prefix)] for s in range(args.seeds)])
        for j, h in enumerate(hs):
            rows.append([args.family, sid, h, gaps[:, j].mean(), gaps[:, j].std(), target])
    w = csv.writer(sys.stdout, lineterminator="\n")
    header = ["family", "system", "n", "mean_gap", "std_gap", "target"]
    w.writerow(header)
    w.writerows(rows)
    if args.out:
        with open(args.out, "w", newline="") as fh:
            csv.writer(fh, lineterminator="\n").writerows([header] + rows)
    jeff = [r for r in rows if r[1] == "jeffreys"]
    if jeff and math.isfinite(target):
        print(f"# jeffreys terminal gap {jeff[-1][3]:.4f} vs target {target:.4f}", file=sys.stderr)


if __name__ == "__main__":
    main()
