"""Weak-form residual against excision size for one scenario.

Usage: python3 scripts/epsilon_sweep.py point-shape --eps 0.2 0.1 0.05 0.025 0.0125
Prints mass and momentum residuals, the fitted order and the Aitken limit.
Line scenarios use a slab around the singular line; cusp data use the strip t <= t0.
"""

import argparse

from chaplab.charmap import PhysCoord
from chaplab.initial_data import builtin_scenario
from chaplab.singularity import analyze
from chaplab.weakform import TestFunction, admissible_radius, epsilon_sweep


def main(argv=None) -> None:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("scenario")
    p.add_argument("--eps", type=float, nargs="+", required=True, help="strictly decreasing excision sizes")
    p.add_argument("--radius", type=float, help="test-function radius (default: largest admissible up to 0.5)")
    p.add_argument("--tol", type=float, default=1e-11)
    args = p.parse_args(argv)
    data = builtin_scenario(args.scenario)
    rep = analyze(data)[0]
    center = rep.blowup
    if rep.line_extent:
        center = PhysCoord(0.5 * sum(rep.line_extent), rep.blowup.x)
    radius = args.radius or admissible_radius(data, center, 0.5)
    sw = epsilon_sweep(data, TestFunction(center, radius), args.eps, rep, args.tol)
    print(f"{args.scenario}: {sw.region}, center ({center.t:.6g}, {center.x:.6g}), radius {radius:.6g}")
    print(f"{'eps':>12} {'mass':>14} {'momentum':>14} {'envelope':>12}")
    for e, m, q, env in zip(sw.epsilons, sw.mass_residuals, sw.momentum_residuals, sw.envelope):
        print(f"{e:12.5g} {m:14.6e} {q:14.6e} {env:12.4g}")
    print(f"fitted order {sw.fitted_order:.3f}, Aitken mass limit {sw.extrapolated_mass:.3e}")
    for f in sw.flags:
        print("flag:", f)


if __name__ == "__main__":
    main()
