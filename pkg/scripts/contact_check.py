"""One-sided limits of u and rho u across the singular line, for several delta ladders.

Usage: python3 scripts/contact_check.py line-shape-1
Shows how the extrapolated jump depends on how close the samples sit to the line.
"""

import argparse

from chaplab.initial_data import builtin_scenario
from chaplab.weakform import rankine_hugoniot_check

LADDERS = ((1e-2, 1e-3, 1e-4), (1e-4, 1e-5, 1e-6), (1e-6, 1e-7, 1e-8))


def main(argv=None) -> None:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("scenario")
    p.add_argument("--samples", type=int, default=10)
    args = p.parse_args(argv)
    data = builtin_scenario(args.scenario)
    for deltas in LADDERS:
        rep = rankine_hugoniot_check(data, deltas=deltas, n_samples=args.samples)
        if not rep.applicable:
            print(f"{args.scenario}: singular set is not a line")
            return
        print(
            f"deltas {deltas}: max jump {rep.max_jump:.3e}, max |limit| {rep.max_abs_limit:.3e}, "
            f"sup |rho u| {rep.sup_abs_rho_u:.6f}, passed {rep.passed}"
        )


if __name__ == "__main__":
    main()
