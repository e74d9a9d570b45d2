"""Fraction of r-tuples from free-group balls that are free bases, and the
fraction certified by the length criterion, as CSV."""
from __future__ import annotations

import argparse
import csv
import sys

from nilprob.genericity import genericity_experiment


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--rank", type=int, default=2)
    ap.add_argument("--radii", default="1,2,3,5,10,15,20")
    ap.add_argument("--trials", type=int, default=10_000)
    ap.add_argument("--seed", type=int, default=7)
    args = ap.parse_args()
    w = csv.writer(sys.stdout)
    w.writerow(["radius", "delzant_frac", "basis_frac", "basis_ci_low", "basis_ci_high"])
    for n in (int(r) for r in args.radii.split(",")):
        res = genericity_experiment(args.rank, n, args.trials, args.seed)
        est = res.basis_estimate
        w.writerow([n, res.delzant_frac, res.basis_frac, est.ci_low, est.ci_high])


if __name__ == "__main__":
    main()
