"""Regenerate src/nilprob/data/golden.json.

Root densities come from a plain-Python enumeration that shares no code with
the library.  The walk and genericity entries record pilot runs at the pinned
seeds; the genericity threshold is fixed by hand below the pilot value.
"""
from __future__ import annotations

import argparse
import itertools
import json
from fractions import Fraction
from pathlib import Path

from nilprob import acceptance as acc

OUT = Path(__file__).resolve().parents[1] / "src" / "nilprob" / "data" / "golden.json"
GENERICITY_THRESHOLD = 0.99


def enum_x1(n):
    hits = sum(1 for x1, _, _ in itertools.product(range(n), repeat=3) if x1 % n == 0)
    return Fraction(hits, n ** 3)


def enum_commutation(n):
    # X1 and W1 do not occur, so they contribute a factor n^2
    hits = sum(1 for x2, x3, w2, w3 in itertools.product(range(n), repeat=4)
               if (x2 * w3 - x3 * w2) % n == 0)
    return Fraction(hits * n * n, n ** 6)


def frac(q: Fraction) -> dict:
    return {"num": str(q.numerator), "den": str(q.denominator)}


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", type=Path, default=OUT)
    args = ap.parse_args()
    primes = acc.ROOT_PRIMES
    golden = {
        "root_density": {
            "x1": {str(n): frac(enum_x1(n)) for n in primes},
            "commutation": {str(n): frac(enum_commutation(n)) for n in primes},
        }
    }
    walk = acc.walk_pilot()
    golden["walk"] = {
        "steps": acc.WALK_STEPS, "trials": acc.WALK_TRIALS, "seed": acc.WALK_SEED,
        "modulus": acc.WALK_MODULUS,
        "successes": walk["estimate"].successes,
        "projected_successes": walk["projected"].successes,
        "projected_exact": walk["projected_exact"],
        "bracket": {str(m): frac(v) for m, v in walk["bracket"].items()},
    }
    sweep = acc.genericity_sweep()
    golden["genericity"] = {
        "rank": acc.GEN_RANK, "trials": acc.GEN_TRIALS, "seed": acc.GEN_SEED,
        "counts": {str(g.radius): g.counts for g in sweep},
        "threshold": GENERICITY_THRESHOLD,
    }
    args.out.write_text(json.dumps(golden, indent=2, sort_keys=True) + "\n")
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
