"""The thirteen acceptance checks, each timed against its budget.

Every check returns a ``CriterionResult``; nothing here raises on a failed
check, so a report can list all outcomes.
"""

from __future__ import annotations

import math
import time
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np
from scipy.integrate import quad

from .asymptotics import cardano_alpha, compute_coefficients, cubic_residual, fit_rates
from .charmap import J_FLOOR, CharCoord, char_map, map_forward, partials
from .initial_data import InitialDataPair, builtin_scenario, constant, validate_assumptions
from .singularity import analyze, classify_point, envelope, lifespan
from .weakform import TestFunction, epsilon_sweep, rankine_hugoniot_check, weak_residual
from .charmap import PhysCoord


@dataclass
class CriterionResult:
    number: int
    title: str
    passed: bool
    runtime: float
    budget: float
    details: dict = field(default_factory=dict)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] criterion {self.number:2d}: {self.title} ({self.runtime:.2f} s, budget {self.budget:g} s)"

    def to_dict(self) -> dict:
        return asdict(self)


def _timed(number: int, title: str, budget: float, body: Callable[[], tuple[bool, dict]]) -> CriterionResult:
    t = time.perf_counter()
    try:
        ok, details = body()
    except Exception as exc:  # a crashing check is a failed check
        ok, details = False, {"error": f"{type(exc).__name__}: {exc}"}
    dt = time.perf_counter() - t
    details["within_budget"] = dt < budget
    return CriterionResult(number, title, bool(ok and dt < budget), dt, budget, details)


def clear_caches():
    char_map.cache_clear()


# ---------------------------------------------------------------------------


def criterion_1() -> CriterionResult:
    def body():
        r = analyze(builtin_scenario("point-shape"))[0]
        et, ex = abs(r.blowup.t - math.pi / 4), abs(r.blowup.x - 1.0)
        return et <= 1e-9 and ex <= 1e-9, {"t0": r.blowup.t, "x0": r.blowup.x, "err_t": et, "err_x": ex}

    return _timed(1, "point-shape blowup point (pi/4, 1)", 1.0, body)


def criterion_2(seed: int = 1) -> CriterionResult:
    def body():
        d = InitialDataPair(constant(-1.0), constant(1.0), window=(-10.0, 10.0), name="constant-state")
        rng = np.random.default_rng(seed)
        worst = 0.0
        for _ in range(100):
            a, b = np.sort(rng.uniform(-10.0, 10.0, 2))
            q = map_forward(d, CharCoord(float(a), float(b)))
            worst = max(worst, abs(q.t - (b - a) / 2), abs(q.x - (a + b) / 2))
        return worst <= 1e-12, {"max_error": worst}

    return _timed(2, "constant-state characteristic map", 1.0, body)


def _interior_pairs(data: InitialDataPair, n: int, t_frac: float, rng) -> tuple[np.ndarray, np.ndarray]:
    """Random (alpha, beta) on the physical sheet with t below t_frac * t0."""
    cm = char_map(data)
    t0 = lifespan(data)
    r = analyze(data)[0]
    a0, b0 = r.witnesses["alpha0"], r.witnesses["beta0"]
    lo, hi = data.window
    out_a, out_b = [], []
    while len(out_a) < n:
        a = rng.uniform(max(lo, a0 - 2.0), min(hi, b0 + 2.0), 4 * n)
        b = rng.uniform(max(lo, a0 - 2.0), min(hi, b0 + 2.0), 4 * n)
        keep = a < b
        a, b = a[keep], b[keep]
        t, _x = cm.forward(a, b)
        J = partials(data, a, b).J
        ok = (t > 1e-3) & (t < t_frac * t0) & (J < 0)
        out_a += a[ok].tolist()
        out_b += b[ok].tolist()
    return np.array(out_a[:n]), np.array(out_b[:n])


def criterion_3(seed: int = 2) -> CriterionResult:
    def body():
        d = builtin_scenario("cusp-tanh")
        rng = np.random.default_rng(seed)
        a, b = _interior_pairs(d, 500, 0.9, rng)
        cm = char_map(d)
        t, x = cm.forward(a, b)
        al, be, _res, Jabs, conv = cm.invert_many(t, x)
        near = int(np.sum(~conv | (Jabs < J_FLOOR)))
        t2, x2 = cm.forward(al, be)
        err = float(np.max(np.hypot(t2 - t, x2 - x)))
        err_ab = float(np.max(np.hypot(al - a, be - b)))
        return near == 0 and err <= 1e-8, {"points": 500, "near_singular": near, "max_image_error": err, "max_char_error": err_ab}

    return _timed(3, "round-trip inversion, 500 interior points", 10.0, body)


def criterion_4() -> CriterionResult:
    def body():
        d = builtin_scenario("cusp-tanh")
        r = analyze(d, n_classify=20)[0]
        a0 = r.witnesses["alpha0"]
        cusp = classify_point(d, a0)
        folds = r.fold_points
        kinds = [classify_point(d, a) for a in folds]
        ok = cusp == "cusp" and len(folds) == 20 and all(k == "fold" for k in kinds)
        return ok, {"alpha0": a0, "alpha0_class": cusp, "fold_samples": len(folds), "fold_all": all(k == "fold" for k in kinds)}

    return _timed(4, "fold/cusp classification on cusp-tanh", 5.0, body)


def criterion_5() -> CriterionResult:
    def body():
        d = builtin_scenario("cusp-tanh")
        a0 = analyze(d)[0].witnesses["alpha0"]
        env = envelope(d, a0, n=200)
        left, right = env.certificates
        ok = left.ok and right.ok and left.samples == 200 and right.samples == 200
        return ok, {"left": asdict(left), "right": asdict(right), "eps": env.eps}

    return _timed(5, "envelope slope and concavity certificates", 5.0, body)


def criterion_6(seed: int = 3) -> CriterionResult:
    def body():
        d = builtin_scenario("cusp-tanh")
        cs = compute_coefficients(d, analyze(d)[0])
        rng = np.random.default_rng(seed)
        tt = rng.choice([-1.0, 1.0], 1000) * 10 ** rng.uniform(-6, -2, 1000)
        xt = rng.choice([-1.0, 1.0], 1000) * 10 ** rng.uniform(-9, -3, 1000)
        worst, trig = 0.0, 0
        for a, b in zip(tt, xt):
            root = cardano_alpha(cs, float(a), float(b))
            trig += root.trig_branch
            worst = max(worst, cubic_residual(cs, root.alpha, float(a), float(b)))
        return worst <= 1e-10, {"max_relative_residual": worst, "trig_branch_count": trig}

    return _timed(6, "Cardano residual on 1000 small offsets", 1.0, body)


CUSP_ROWS = (("rho", "I"), ("rho", "II"), ("u_x", "I"), ("rho_x", "II"), ("u-deviation", "II"))


def criterion_7() -> CriterionResult:
    def body():
        d = builtin_scenario("cusp-tanh")
        r = analyze(d)[0]
        rows = {}
        ok = True
        for q, path in CUSP_ROWS:
            rep = fit_rates(d, r, q, path)
            rows[f"{q} case {path}"] = {
                "fitted": rep.fitted_exponent,
                "expected": rep.expected_exponent,
                "r2": rep.r_squared,
                "decades": rep.decades,
                "passed": rep.passed(),
            }
            ok &= rep.passed()
        return ok, rows

    return _timed(7, "cusp blowup-rate exponents", 60.0, body)


def criterion_8() -> CriterionResult:
    def body():
        d = builtin_scenario("point-shape")
        r = analyze(d)[0]
        rows, ok = {}, True
        for path in ("I", "II"):
            rep = fit_rates(d, r, "rho", path)
            rows[f"rho case {path}"] = {
                "fitted": rep.fitted_exponent,
                "expected": rep.expected_exponent,
                "r2": rep.r_squared,
                "passed": rep.passed(),
            }
            ok &= rep.passed()
        return ok, rows

    return _timed(8, "point-shape density exponents", 30.0, body)


def random_classical_test_functions(data: InitialDataPair, n: int, rng, t_frac: float = 0.9) -> list[TestFunction]:
    """Bumps supported in 0 <= t < t_frac * t0 around the blowup abscissa, some touching t = 0."""
    t0 = lifespan(data)
    x0 = analyze(data)[0].blowup.x
    out = []
    while len(out) < n:
        R = rng.uniform(0.1, 0.35)
        ct = rng.uniform(-0.5 * R, t_frac * t0 - R)
        cx = x0 + rng.uniform(-1.0, 1.0)
        if ct + R < t_frac * t0:
            out.append(TestFunction(PhysCoord(float(ct), float(cx)), float(R)))
    return out


def criterion_9(seed: int = 4) -> CriterionResult:
    def body():
        d = builtin_scenario("cusp-tanh")
        rng = np.random.default_rng(seed)
        worst = 0.0
        for phi in random_classical_test_functions(d, 20, rng):
            m, p = weak_residual(d, phi, tol=1e-10)
            worst = max(worst, abs(m), abs(p))
        return worst <= 1e-8, {"max_residual": worst, "test_functions": 20}

    return _timed(9, "weak residual in classical regions", 60.0, body)


POINT_SWEEP_EPS = (0.2, 0.1, 0.05, 0.025)


def criterion_10() -> CriterionResult:
    def body():
        d = builtin_scenario("point-shape")
        r = analyze(d)[0]
        phi = TestFunction(r.blowup, 0.5)
        sw = epsilon_sweep(d, phi, POINT_SWEEP_EPS, r)
        mags = np.abs(sw.mass_residuals)
        decreasing = bool(np.all(np.diff(mags) < 0))
        limit_ok = abs(sw.extrapolated_mass) <= 1e-6
        env_ok = all(abs(m) <= e + 1e-8 for m, e in zip(sw.mass_residuals, sw.envelope))
        return decreasing and limit_ok and env_ok, {
            "mass_residuals": sw.mass_residuals,
            "momentum_residuals": sw.momentum_residuals,
            "strictly_decreasing": decreasing,
            "extrapolated_mass": sw.extrapolated_mass,
            "limit_ok": limit_ok,
            "envelope_ok": env_ok,
            "fitted_order": sw.fitted_order,
        }

    return _timed(10, "point-shape epsilon sweep", 120.0, body)


def criterion_11() -> CriterionResult:
    def body():
        out, ok = {}, True
        for name in ("line-shape-1", "line-shape-2"):
            rep = rankine_hugoniot_check(builtin_scenario(name), n_samples=10)
            out[name] = {
                "max_jump": rep.max_jump,
                "max_abs_limit": rep.max_abs_limit,
                "sup_abs_rho_u": rep.sup_abs_rho_u,
                "deltas": rep.deltas,
                "passed": rep.passed,
            }
            ok &= rep.passed and len(rep.samples) == 10
        return ok, out

    return _timed(11, "contact condition across the singular line", 60.0, body)


def criterion_12() -> CriterionResult:
    def body():
        rep = validate_assumptions(builtin_scenario("degenerate-linear"), "H")
        f_max = rep.diagnostics.get("f_max_abs", math.inf)
        ok = (not rep.satisfied) and rep.failed("H5") and f_max <= 1e-12
        return ok, {"violations": [v.condition for v in rep.violations], "f_max_abs": f_max}

    return _timed(12, "degenerate data rejected by H5", 1.0, body)


def criterion_13() -> CriterionResult:
    def body():
        d = builtin_scenario("multi-point")
        reports = analyze(d)
        rows, ok = [], len(reports) == 2 and all(r.kind == "point-shape" for r in reports)
        for r in reports:
            a0, b0 = r.witnesses["alpha0"], r.witnesses["beta0"]

            def inv(z):
                return 1.0 / float(d.gap(z))

            def drift(z):
                return float(d.lambda_plus(z) + d.lambda_minus(z)) / float(d.gap(z))

            # independent quadrature oracle
            t_ref = quad(inv, a0, b0, epsabs=1e-14, epsrel=1e-13, limit=200)[0]
            x_ref = 0.5 * (a0 + b0 + quad(drift, a0, b0, epsabs=1e-14, epsrel=1e-13, limit=200)[0])
            et, ex = abs(r.blowup.t - t_ref), abs(r.blowup.x - x_ref)
            rows.append({"alpha0": a0, "beta0": b0, "t0": r.blowup.t, "x0": r.blowup.x, "err_t": et, "err_x": ex})
            ok &= et <= 1e-9 and ex <= 1e-9
        return ok, {"reports": rows}

    return _timed(13, "multi-point: two independent point-shape singularities", 10.0, body)


CRITERIA = (
    criterion_1,
    criterion_2,
    criterion_3,
    criterion_4,
    criterion_5,
    criterion_6,
    criterion_7,
    criterion_8,
    criterion_9,
    criterion_10,
    criterion_11,
    criterion_12,
    criterion_13,
)


def run_all(cold: bool = True) -> list[CriterionResult]:
    """Run every criterion; ``cold`` clears shared caches first so timings include setup."""
    out = []
    for fn in CRITERIA:
        if cold:
            clear_caches()
        out.append(fn())
    return out
