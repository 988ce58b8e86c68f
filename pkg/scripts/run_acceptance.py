"""Run every acceptance criterion and print one pass/fail line each.

Usage: python3 scripts/run_acceptance.py [--json results.json] [--only 7 10 11]
Exit status is 0 when all selected criteria pass, 1 otherwise.
"""

import argparse
import json
import sys

from chaplab.acceptance import CRITERIA, clear_caches
from chaplab.cli import _clean


def main(argv=None) -> int:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--json", help="write full per-criterion details here")
    p.add_argument("--only", type=int, nargs="+", help="criterion numbers to run")
    args = p.parse_args(argv)
    chosen = [(i + 1, fn) for i, fn in enumerate(CRITERIA) if not args.only or i + 1 in args.only]
    results = []
    for _n, fn in chosen:
        clear_caches()
        res = fn()
        print(res.line(), flush=True)
        results.append(res)
    print(f"{sum(r.passed for r in results)}/{len(results)} criteria passed")
    if args.json:
        with open(args.json, "w", encoding="utf-8") as fh:
            json.dump(_clean([r.to_dict() for r in results]), fh, indent=2, sort_keys=True)
    return 0 if all(r.passed for r in results) else 1


if __name__ == "__main__":
    sys.exit(main())
