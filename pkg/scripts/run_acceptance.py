"""Run the acceptance suite and print one line per criterion."""
from __future__ import annotations

import argparse
import sys

from nilprob.acceptance import run_suite


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--only", nargs="*", help="criterion ids or names")
    args = ap.parse_args()
    results = run_suite(args.only)
    for r in results:
        print(r.line())
        for w in r.witness[1:]:
            print("    " + w)
    sys.exit(1 if any(r.status == "fail" for r in results) else 0)


if __name__ == "__main__":
    main()
