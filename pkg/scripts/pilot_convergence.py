"""Convergence of dc1 estimates under the lazy Heisenberg walk.

Prints one CSV row per step count: the Monte Carlo estimate with its Wilson
interval, and the exact commuting probability of the walk projected to G(3)
and G(9).
"""
from __future__ import annotations

import argparse
import csv
import sys

from nilprob import malcev as mc
from nilprob import sampling as smp


def exact_projected(H, n, steps):
    Q = mc.finite_quotient(H, n)
    step = smp.lazy_generator_steps(H.identity, H.generators, H.inverse)
    support = [mc.reduce_element(Q, g) for g in step.support]
    law = smp.walk_distribution(Q, support, step.weights, steps)
    return smp.commuting_probability(Q, law)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--steps", default="25,50,100,200,400")
    ap.add_argument("--trials", type=int, default=20_000)
    ap.add_argument("--seed", type=int, default=42)
    args = ap.parse_args()
    H = mc.heisenberg()
    w = csv.writer(sys.stdout)
    w.writerow(["steps", "point", "ci_low", "ci_high", "exact_mod3", "exact_mod9"])
    for steps in (int(s) for s in args.steps.split(",")):
        est = smp.estimate_dc_k(smp.heisenberg_walk(H, steps), 1, args.trials, args.seed)
        w.writerow([steps, est.point, est.ci_low, est.ci_high,
                    exact_projected(H, 3, steps), exact_projected(H, 9, steps)])


if __name__ == "__main__":
    main()
