"""Fitted blowup exponents along the canonical approach paths, against the expected bound exponents.

Usage: python3 scripts/rates_table.py [cusp-tanh point-shape ...]
"""

import argparse

from chaplab.asymptotics import EXPECTED, compute_coefficients, fit_rates
from chaplab.errors import NumericError
from chaplab.initial_data import builtin_scenario
from chaplab.singularity import analyze


def main(argv=None) -> None:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("scenarios", nargs="*", default=["cusp-tanh", "point-shape"])
    p.add_argument("--samples", type=int, default=16)
    args = p.parse_args(argv)
    for name in args.scenarios:
        data = builtin_scenario(name)
        rep = analyze(data)[0]
        kind = compute_coefficients(data, rep).kind
        print(f"{name} ({rep.kind})")
        for (k, path), table in sorted(EXPECTED.items()):
            if k != kind:
                continue
            for q in sorted(table):
                try:
                    fit = fit_rates(data, rep, q, path, samples=args.samples)
                except NumericError as exc:
                    print(f"  {q:>12} case {path:<3} failed: {exc}")
                    continue
                print(
                    f"  {q:>12} case {path:<3} fitted {fit.fitted_exponent:8.4f}  expected {fit.expected_exponent:8.4f}"
                    f"  R^2 {fit.r_squared:.6f}  {'matches' if fit.passed() else 'differs'}"
                )


if __name__ == "__main__":
    main()
