"""Initial curves Lambda_-(x), Lambda_+(x) and the assumption validator.

Curves are closed-form parametric families with hand-coded first and second
derivatives.  Everything here is vectorised over ``x``.

Tail behaviour: every family below is monotone or constant outside any
bounded interval containing its knots/inflection structure, so grid checks on
a validation window that brackets that structure stand in for the global
"for all x" conditions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Callable, Sequence

import numpy as np
from scipy.optimize import brentq

from .errors import ConfigError

EQ_TOL = 1e-9
MARGIN = 1e-12
FD_STEP = 1e-6


# ---------------------------------------------------------------------------
# curve families


class SmoothCurve:
    """Base class.  Subclasses implement ``_eval(x, order)`` for order 0..2."""

    family: str = "abstract"

    def __call__(self, x, order: int = 0):
        if order not in (0, 1, 2):
            raise ConfigError(f"derivative order must be 0, 1 or 2, got {order!r}")
        x = np.asarray(x, dtype=float)
        return self._eval(x, order)

    def d1(self, x):
        return self(x, 1)

    def d2(self, x):
        return self(x, 2)

    def knots(self) -> tuple[float, ...]:
        """Points where the curve is only finitely smooth (quadrature breakpoints)."""
        return ()

    def _eval(self, x, order):  # pragma: no cover - abstract
        raise NotImplementedError

    def recentred(self, c: float) -> "SmoothCurve":
        """The curve z -> self(z + c), with c folded into the parameters.

        Evaluating the result at a small offset z avoids forming c + z, which
        would lose the low-order bits of z.
        """
        raise NotImplementedError

    def __add__(self, other: "SmoothCurve") -> "SmoothCurve":
        return Sum((self, other))

    def __neg__(self) -> "SmoothCurve":
        return Scale(-1.0, self)


@dataclass(frozen=True)
class Polynomial(SmoothCurve):
    """sum_k coeffs[k] * x**k (ascending powers)."""

    coeffs: tuple[float, ...]
    family = "polynomial"

    def __post_init__(self):
        if len(self.coeffs) == 0:
            raise ConfigError("polynomial needs at least one coefficient")
        object.__setattr__(self, "coeffs", tuple(float(c) for c in self.coeffs))

    @property
    def params(self):
        return list(self.coeffs)

    def _eval(self, x, order):
        c = np.polynomial.polynomial.polyder(self.coeffs, order) if order else self.coeffs
        return np.polynomial.polynomial.polyval(x, c) + 0.0 * x

    def recentred(self, c):
        return Polynomial(_taylor_shift(self.coeffs, c))


@dataclass(frozen=True)
class Rational(SmoothCurve):
    """num(x) / den(x); the caller guarantees den has no zero on the window."""

    num: tuple[float, ...]
    den: tuple[float, ...]
    family = "rational"

    def __post_init__(self):
        if not self.num or not self.den:
            raise ConfigError("rational needs numerator and denominator coefficients")
        object.__setattr__(self, "num", tuple(float(c) for c in self.num))
        object.__setattr__(self, "den", tuple(float(c) for c in self.den))

    @property
    def params(self):
        return list(self.num)

    def _eval(self, x, order):
        P = np.polynomial.polynomial
        n0, n1, n2 = (P.polyval(x, P.polyder(self.num, k)) if k else P.polyval(x, self.num) for k in range(3))
        d0, d1, d2 = (P.polyval(x, P.polyder(self.den, k)) if k else P.polyval(x, self.den) for k in range(3))
        r = n0 / d0
        if order == 0:
            return r
        r1 = (n1 - r * d1) / d0
        if order == 1:
            return r1
        return (n2 - 2.0 * r1 * d1 - r * d2) / d0

    def recentred(self, c):
        return Rational(_taylor_shift(self.num, c), _taylor_shift(self.den, c))


@dataclass(frozen=True)
class TanhComposite(SmoothCurve):
    """amp * tanh(rate * x + phase) + offset."""

    amp: float = 1.0
    rate: float = 1.0
    phase: float = 0.0
    offset: float = 0.0
    family = "tanh-composite"

    @property
    def params(self):
        return [self.amp, self.rate, self.phase, self.offset]

    def _eval(self, x, order):
        th = np.tanh(self.rate * x + self.phase)
        if order == 0:
            return self.amp * th + self.offset
        sech2 = 1.0 - th * th
        if order == 1:
            return self.amp * self.rate * sech2
        return -2.0 * self.amp * self.rate**2 * th * sech2

    def recentred(self, c):
        return TanhComposite(self.amp, self.rate, self.phase + self.rate * c, self.offset)


@dataclass(frozen=True)
class PlateauQuartic(SmoothCurve):
    """k_left*(left-x)**4 for x<left, 0 on [left, right], k_right*(x-right)**4 for x>right.

    C^3 across both knots, which is more than the C^2 the analysis needs.
    """

    left: float
    right: float
    k_left: float = 1.0
    k_right: float = 1.0
    family = "plateau-quartic"

    def __post_init__(self):
        if not self.left <= self.right:
            raise ConfigError(f"plateau-quartic needs left <= right, got {self.left}, {self.right}")

    @property
    def params(self):
        return [self.left, self.right, self.k_left, self.k_right]

    def knots(self):
        return (self.left, self.right)

    def _eval(self, x, order):
        dl = np.minimum(x - self.left, 0.0)  # <= 0 left of the plateau
        dr = np.maximum(x - self.right, 0.0)  # >= 0 right of the plateau
        if order == 0:
            return self.k_left * dl**4 + self.k_right * dr**4
        if order == 1:
            return 4.0 * (self.k_left * dl**3 + self.k_right * dr**3)
        return 12.0 * (self.k_left * dl**2 + self.k_right * dr**2)

    def recentred(self, c):
        return PlateauQuartic(self.left - c, self.right - c, self.k_left, self.k_right)


@dataclass(frozen=True)
class Sum(SmoothCurve):
    terms: tuple[SmoothCurve, ...]
    family = "sum"

    @property
    def params(self):
        return []

    def knots(self):
        return tuple(sorted({k for t in self.terms for k in t.knots()}))

    def _eval(self, x, order):
        out = np.zeros_like(x)
        for term in self.terms:
            out = out + term._eval(x, order)
        return out

    def recentred(self, c):
        return Sum(tuple(t.recentred(c) for t in self.terms))


@dataclass(frozen=True)
class Scale(SmoothCurve):
    """k * curve(x)."""

    k: float
    curve: SmoothCurve
    family = "scale"

    @property
    def params(self):
        return [self.k]

    def knots(self):
        return self.curve.knots()

    def _eval(self, x, order):
        return self.k * self.curve._eval(x, order)

    def recentred(self, c):
        return Scale(self.k, self.curve.recentred(c))


@dataclass(frozen=True)
class Shift(SmoothCurve):
    """curve(x - s): the graph translated right by ``s``."""

    s: float
    curve: SmoothCurve
    family = "shift"

    @property
    def params(self):
        return [self.s]

    def knots(self):
        return tuple(k + self.s for k in self.curve.knots())

    def _eval(self, x, order):
        return self.curve._eval(x - self.s, order)

    def recentred(self, c):
        return self.curve.recentred(c - self.s)


def _taylor_shift(coeffs, c: float) -> tuple[float, ...]:
    """Ascending coefficients of p(z + c) by repeated synthetic division."""
    a = [float(v) for v in coeffs]
    n = len(a)
    for i in range(n):
        for j in range(n - 2, i - 1, -1):
            a[j] += c * a[j + 1]
    return tuple(a)


def constant(c: float) -> Polynomial:
    return Polynomial((c,))


def eval_curve(curve: SmoothCurve, x, order: int = 0):
    """Lambda(x), Lambda'(x) or Lambda''(x) from the closed-form expressions."""
    if not isinstance(curve, SmoothCurve):
        raise ConfigError(f"not a curve: {curve!r}")
    return curve(x, order)


# ---------------------------------------------------------------------------
# JSON curve specs

_LEAF_BUILDERS: dict[str, Callable[[dict], SmoothCurve]] = {
    "polynomial": lambda spec: Polynomial(tuple(spec["params"])),
    "rational": lambda spec: Rational(tuple(spec["params"]), tuple(spec["denominator"])),
    "tanh-composite": lambda spec: TanhComposite(*spec["params"]),
    "plateau-quartic": lambda spec: PlateauQuartic(*spec["params"]),
}
_LEAF_KEYS = {"family", "params", "denominator", "shift", "scale"}


def curve_from_spec(spec: Any) -> SmoothCurve:
    """Build a curve from ``{"family": ..., "params": [...]}`` or ``{"sum": [...]}``.

    Either form may carry ``"shift": s`` (argument translation) and
    ``"scale": k`` (value multiplier); shift is applied first.
    """
    if not isinstance(spec, dict):
        raise ConfigError(f"curve spec must be an object, got {type(spec).__name__}")
    if "sum" in spec:
        unknown = set(spec) - {"sum", "shift", "scale"}
        if unknown:
            raise ConfigError(f"unknown keys in sum spec: {sorted(unknown)}")
        if not isinstance(spec["sum"], list) or not spec["sum"]:
            raise ConfigError("'sum' must be a non-empty list of curve specs")
        curve: SmoothCurve = Sum(tuple(curve_from_spec(s) for s in spec["sum"]))
    else:
        unknown = set(spec) - _LEAF_KEYS
        if unknown:
            raise ConfigError(f"unknown keys in curve spec: {sorted(unknown)}")
        family = spec.get("family")
        if family not in _LEAF_BUILDERS:
            raise ConfigError(f"unknown curve family {family!r}")
        if family != "rational" and "denominator" in spec:
            raise ConfigError("'denominator' only applies to the rational family")
        try:
            curve = _LEAF_BUILDERS[family](spec)
        except (KeyError, TypeError) as exc:
            raise ConfigError(f"bad parameters for {family}: {exc}") from exc
    if "shift" in spec:
        curve = Shift(float(spec["shift"]), curve)
    if "scale" in spec:
        curve = Scale(float(spec["scale"]), curve)
    return curve


# ---------------------------------------------------------------------------
# initial data


@dataclass(frozen=True)
class InitialDataPair:
    """Riemann-invariant initial data Lambda_-(x) = u0 - mu/rho0, Lambda_+ = u0 + mu/rho0."""

    lambda_minus: SmoothCurve
    lambda_plus: SmoothCurve
    mu: float = 1.0
    p0: float = 1.0
    window: tuple[float, float] = (-5.0, 5.0)
    name: str = "custom"

    def __post_init__(self):
        if not (self.mu > 0 and self.p0 > 0):
            raise ConfigError("mu and p0 must be positive")
        a, b = self.window
        if not a < b:
            raise ConfigError(f"window must satisfy a < b, got {self.window}")

    def gap(self, x):
        """Lambda_+(x) - Lambda_-(x)."""
        return self.lambda_plus(x) - self.lambda_minus(x)

    def rho0(self, x):
        return 2.0 * self.mu / self.gap(x)

    def u0(self, x):
        return 0.5 * (self.lambda_plus(x) + self.lambda_minus(x))

    def knots(self) -> tuple[float, ...]:
        return tuple(sorted(set(self.lambda_minus.knots()) | set(self.lambda_plus.knots())))

    def recentred(self, c: float) -> tuple[SmoothCurve, SmoothCurve]:
        """(Lambda_-(z + c), Lambda_+(z + c)) as curves in the offset z."""
        return self.lambda_minus.recentred(c), self.lambda_plus.recentred(c)

    def shifted(self, c: float) -> "InitialDataPair":
        """Galilean shift u -> u - c (both invariants drop by c)."""
        return InitialDataPair(
            Sum((self.lambda_minus, constant(-c))),
            Sum((self.lambda_plus, constant(-c))),
            self.mu,
            self.p0,
            self.window,
            f"{self.name}-shift",
        )


# ---------------------------------------------------------------------------
# builtin scenarios

SCENARIO_SETS = {
    "cusp-tanh": "H",
    "point-shape": "A",
    "line-shape-1": "B-right",
    "line-shape-2": "C",
    "degenerate-linear": "H",
    "multi-point": "A-prime",
}
_EXPECTED_SATISFIED = {name: name != "degenerate-linear" for name in SCENARIO_SETS}


def builtin_scenario(name: str) -> InitialDataPair:
    x2 = Polynomial((0.0, 0.0, 1.0))
    if name == "cusp-tanh":
        lm, lp, win = TanhComposite(-1.0, 1.0, 0.0, 0.0), TanhComposite(1.0, -1.0, 2.0, 0.0), (-4.0, 6.0)
    elif name == "point-shape":
        # shifted square instead of 4 - 4x + x^2: keeps (x-2)^2 accurate next to x = 2
        lm, lp, win = Polynomial((0.0, 0.0, -1.0)), Shift(2.0, x2), (-6.0, 8.0)
    elif name == "line-shape-1":
        lm, lp, win = Scale(-1.0, x2), PlateauQuartic(2.0, 3.0), (-12.0, 14.0)
    elif name == "line-shape-2":
        lm, lp, win = Scale(-1.0, PlateauQuartic(-1.0, 0.0)), PlateauQuartic(2.0, 3.0), (-12.0, 12.0)
    elif name == "degenerate-linear":
        lm, lp, win = Polynomial((0.0, -1.0)), Polynomial((2.0, -1.0)), (-3.0, 5.0)
    elif name == "multi-point":
        # -x^2 (x+2)^2 / 4: double zeros at -2 and 0; Lambda_+ = (x-2)^2
        lm, lp, win = Polynomial((0.0, 0.0, -1.0, -1.0, -0.25)), Polynomial((4.0, -4.0, 1.0)), (-4.0, 4.0)
    else:
        raise ConfigError(f"unknown scenario {name!r}; known: {sorted(SCENARIO_SETS)}")
    return InitialDataPair(lm, lp, mu=1.0, p0=1.0, window=win, name=name)


def pair_from_config(obj: Any) -> InitialDataPair:
    """Builtin name, or ``{"lambda_minus": spec, "lambda_plus": spec, ...}``."""
    if isinstance(obj, str):
        return builtin_scenario(obj)
    if not isinstance(obj, dict):
        raise ConfigError("scenario must be a builtin name or an inline object")
    allowed = {"lambda_minus", "lambda_plus", "mu", "p0", "window", "name"}
    unknown = set(obj) - allowed
    if unknown:
        raise ConfigError(f"unknown scenario keys: {sorted(unknown)}")
    try:
        lm = curve_from_spec(obj["lambda_minus"])
        lp = curve_from_spec(obj["lambda_plus"])
    except KeyError as exc:
        raise ConfigError(f"inline scenario missing {exc}") from exc
    window = tuple(float(v) for v in obj.get("window", (-5.0, 5.0)))
    if len(window) != 2:
        raise ConfigError("window must be [a, b]")
    return InitialDataPair(lm, lp, float(obj.get("mu", 1.0)), float(obj.get("p0", 1.0)), window, obj.get("name", "custom"))


# ---------------------------------------------------------------------------
# assumption validation

ASSUMPTION_SETS = ("H", "A", "B-left", "B-right", "C", "A-prime")
_GLOBAL_CONDITIONS = {"H1", "H2", "A1", "B1", "C1"}


@dataclass(frozen=True)
class Violation:
    condition: str
    x: float | None
    value: float
    message: str = ""


@dataclass
class AssumptionReport:
    assumption_set: str
    witnesses: dict = field(default_factory=dict)
    violations: list[Violation] = field(default_factory=list)
    eq_tol: float = EQ_TOL
    margin: float = MARGIN
    interval: tuple[float, float] = (0.0, 0.0)
    diagnostics: dict = field(default_factory=dict)

    @property
    def satisfied(self) -> bool:
        return not self.violations

    @property
    def global_ok(self) -> bool:
        return not any(v.condition in _GLOBAL_CONDITIONS for v in self.violations)

    @property
    def local_ok(self) -> bool:
        return not any(v.condition not in _GLOBAL_CONDITIONS for v in self.violations)

    def failed(self, condition: str) -> bool:
        return any(v.condition == condition for v in self.violations)

    def to_dict(self) -> dict:
        return {
            "assumption_set": self.assumption_set,
            "satisfied": self.satisfied,
            "global_ok": self.global_ok,
            "local_ok": self.local_ok,
            "interval": list(self.interval),
            "eq_tol": self.eq_tol,
            "margin": self.margin,
            "witnesses": self.witnesses,
            "violations": [
                {"condition": v.condition, "x": v.x, "value": v.value, "message": v.message} for v in self.violations
            ],
            "diagnostics": self.diagnostics,
        }


def sigma_beta(data: InitialDataPair, alpha, interval: tuple[float, float] | None = None, iters: int = 80):
    """beta(alpha) solving Lambda_+(beta) = Lambda_-(alpha) with alpha < beta <= b.

    Vectorised bisection; assumes Lambda_+ is decreasing on [alpha, b].  Entries
    without a sign change come back as NaN.
    """
    a, b = interval or data.window
    alpha = np.atleast_1d(np.asarray(alpha, dtype=float))
    target = data.lambda_minus(alpha)
    lo = alpha.copy()
    hi = np.full_like(alpha, b)
    g_lo = data.lambda_plus(lo) - target
    g_hi = data.lambda_plus(hi) - target
    ok = (g_lo > 0) & (g_hi <= 0) & (alpha < b)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        g = data.lambda_plus(mid) - target
        right = g > 0
        lo = np.where(right, mid, lo)
        hi = np.where(right, hi, mid)
    beta = 0.5 * (lo + hi)
    # exact hit of the upper end counts
    beta = np.where(g_hi == 0, b, beta)
    return np.where(ok, beta, np.nan)


def f_indicator(data: InitialDataPair, alpha, beta=None):
    """f(alpha) = Lambda_-'(alpha)/D(beta) - Lambda_+'(beta)/D(alpha), D = Lambda_+ - Lambda_-."""
    if beta is None:
        beta = sigma_beta(data, alpha)
    return data.lambda_minus(alpha, 1) / data.gap(beta) - data.lambda_plus(beta, 1) / data.gap(alpha)


def _f_scalar(data: InitialDataPair, alpha: float, interval) -> float:
    beta = sigma_beta(data, alpha, interval)[0]
    return float(f_indicator(data, alpha, beta))


def _sign_change_roots(g: Callable, grid: np.ndarray, values: np.ndarray) -> list[float]:
    roots = []
    for i in np.nonzero(values[:-1] * values[1:] < 0)[0]:
        roots.append(float(brentq(g, grid[i], grid[i + 1], xtol=1e-15, rtol=1e-15)))
    return roots


def double_zeros(curve: SmoothCurve, grid: np.ndarray, eq_tol: float) -> list[float]:
    """Points where curve and its slope both vanish (touching zeros, not plateaus)."""
    d1 = curve(grid, 1)
    cands = _sign_change_roots(lambda x: float(curve(x, 1)), grid, d1)
    # a grid point may land exactly on the critical point
    exact = [float(x) for x, v, s in zip(grid, curve(grid), d1) if s == 0.0 and abs(v) <= eq_tol]
    out = []
    for x in sorted(cands + exact):
        if abs(float(curve(x))) <= eq_tol and not any(abs(x - y) < 1e-9 for y in out):
            # skip interior points of a plateau: there the slope is flat on both sides
            h = 1e-4
            if float(abs(curve(x - h))) <= eq_tol**2 and float(abs(curve(x + h))) <= eq_tol**2:
                continue
            out.append(x)
    return out


def simple_zeros(curve: SmoothCurve, grid: np.ndarray) -> list[float]:
    return _sign_change_roots(lambda x: float(curve(x)), grid, curve(grid))


def plateaus(curve: SmoothCurve, grid: np.ndarray, eq_tol: float) -> list[tuple[float, float]]:
    """Maximal segments where the curve vanishes identically, ends refined by bisection."""
    strict = eq_tol**2

    def flat(x):
        return max(abs(float(curve(x, k))) for k in range(3)) <= strict

    mask = np.array([flat(x) for x in grid])
    out = []
    i, n = 0, len(grid)
    while i < n:
        if not mask[i]:
            i += 1
            continue
        j = i
        while j + 1 < n and mask[j + 1]:
            j += 1
        if j > i:
            lo_end = _refine_edge(flat, grid[i - 1], grid[i]) if i > 0 else float(grid[0])
            hi_end = _refine_edge(flat, grid[j + 1], grid[j]) if j + 1 < n else float(grid[-1])
            out.append((_snap(lo_end, curve, grid), _snap(hi_end, curve, grid)))
        i = j + 1
    return out


def _snap(x: float, curve: SmoothCurve, grid: np.ndarray) -> float:
    # the bisected edge sits ~sqrt(tol) inside the knot for quartic joins
    h = float(grid[1] - grid[0])
    near = [k for k in curve.knots() if abs(k - x) <= h]
    return float(min(near, key=lambda k: abs(k - x))) if near else x


def _refine_edge(flat: Callable[[float], bool], outside: float, inside: float) -> float:
    for _ in range(100):
        mid = 0.5 * (outside + inside)
        if mid in (outside, inside):
            break
        if flat(mid):
            inside = mid
        else:
            outside = mid
    return float(inside)


def validate_assumptions(
    data: InitialDataPair,
    assumption_set: str,
    interval: tuple[float, float] | None = None,
    grid_n: int = 2001,
    tol: float = EQ_TOL,
    margin: float = MARGIN,
) -> AssumptionReport:
    """Check one assumption set of the blowup analysis on a grid over ``interval``.

    Equalities are accepted within ``tol``; strict inequalities need ``margin``.
    """
    if assumption_set not in ASSUMPTION_SETS:
        raise ConfigError(f"unknown assumption set {assumption_set!r}; known: {ASSUMPTION_SETS}")
    if grid_n < 100:
        raise ConfigError("grid_n must be >= 100")
    a, b = interval or data.window
    if not a < b:
        raise ConfigError("interval must satisfy a < b")
    grid = np.linspace(a, b, grid_n)
    rep = AssumptionReport(assumption_set, eq_tol=tol, margin=margin, interval=(float(a), float(b)))
    checker = {
        "H": _check_h,
        "A": _check_a,
        "A-prime": _check_a_prime,
        "B-right": _check_b_right,
        "B-left": _check_b_left,
        "C": _check_c,
    }[assumption_set]
    cond1 = {"H": "H1", "A": "A1", "A-prime": "A1", "B-right": "B1", "B-left": "B1", "C": "C1"}[assumption_set]
    _check_separation(data, grid, rep, cond1)
    checker(data, grid, rep)
    return rep


def _add(rep: AssumptionReport, cond: str, x, value, msg: str = ""):
    rep.violations.append(Violation(cond, None if x is None else float(x), float(value), msg))


def _check_separation(data, grid, rep, cond):
    gap = data.gap(grid)
    rep.diagnostics["min_gap"] = float(gap.min())
    if not np.all(np.isfinite(gap)) or gap.min() <= rep.margin:
        i = int(np.nanargmin(gap))
        _add(rep, cond, grid[i], gap[i], "Lambda_- < Lambda_+ fails")


def _check_h(data, grid, rep):
    tol, margin = rep.eq_tol, rep.margin
    interval = (grid[0], grid[-1])
    for cond_curve, label in ((data.lambda_minus, "Lambda_-'"), (data.lambda_plus, "Lambda_+'")):
        d1 = cond_curve(grid, 1)
        if d1.max() >= -margin:
            i = int(np.argmax(d1))
            _add(rep, "H2", grid[i], d1[i], f"{label} < 0 fails")
    beta = sigma_beta(data, grid, interval)
    on_sigma = np.isfinite(beta)
    rep.diagnostics["sigma_points"] = int(on_sigma.sum())
    if not on_sigma.any():
        _add(rep, "H3", None, 0.0, "H3 witness not found: Lambda_-(alpha) = Lambda_+(beta) has no solution")
        return
    ag, bg = grid[on_sigma], beta[on_sigma]
    fv = f_indicator(data, ag, bg)
    rep.diagnostics["f_max_abs"] = float(np.max(np.abs(fv)))

    def fs(al):
        return _f_scalar(data, al, interval)

    roots = []
    if rep.diagnostics["f_max_abs"] <= tol:
        # f vanishes identically: any Sigma point is a witness, H5 decides
        mid = len(ag) // 2
        roots = [float(ag[mid])]
    for i in np.nonzero(fv[:-1] * fv[1:] < 0)[0] if not roots else ():
        try:
            roots.append(float(brentq(fs, ag[i], ag[i + 1], xtol=1e-15, rtol=1e-15)))
        except ValueError:
            continue
    if not roots:
        small = np.nonzero(np.abs(fv) <= tol)[0]
        if small.size == 0:
            _add(rep, "H4", None, float(np.min(np.abs(fv))), "H4 witness not found: f has no sign change")
            return
        roots = [float(ag[small[len(small) // 2]])]

    def fprime(al):
        return (fs(al + FD_STEP) - fs(al - FD_STEP)) / (2.0 * FD_STEP)

    slopes = [fprime(r) for r in roots]
    k = int(np.argmin(slopes))
    alpha0, fp = roots[k], slopes[k]
    beta0 = float(sigma_beta(data, alpha0, interval)[0])
    rep.witnesses.update(alpha0=alpha0, beta0=beta0, f_prime=fp)
    rep.diagnostics["f_roots"] = roots
    mismatch = float(data.lambda_minus(alpha0) - data.lambda_plus(beta0))
    if not (alpha0 < beta0) or abs(mismatch) > tol:
        _add(rep, "H3", alpha0, mismatch, "Lambda_-(alpha0) = Lambda_+(beta0) fails")
    f0 = fs(alpha0)
    if abs(f0) > tol:
        _add(rep, "H4", alpha0, f0, "f(alpha0) = 0 fails")
    if not fp < -tol:
        _add(rep, "H5", alpha0, fp, "f'(alpha0) < 0 fails")


def _double_zero_witness(curve, grid, tol, cond, label):
    zs = double_zeros(curve, grid, tol)
    if zs:
        return zs
    simple = simple_zeros(curve, grid)
    return simple  # reported below through the slope/curvature checks


def _check_touch(rep, curve, x, cond3, cond4, sign, label):
    tol, margin = rep.eq_tol, rep.margin
    d1 = float(curve(x, 1))
    if abs(d1) > tol:
        _add(rep, cond3, x, d1, f"{label}' = 0 fails")
    d2 = float(curve(x, 2))
    if not sign * d2 > margin:
        _add(rep, cond4, x, d2, f"{label}'' {'<' if sign < 0 else '>'} 0 fails")


def _check_value_zero(rep, curve, x, cond, label):
    v = float(curve(x))
    if abs(v) > rep.eq_tol:
        _add(rep, cond, x, v, f"{label} = 0 fails")


def _check_a(data, grid, rep):
    alphas = _double_zero_witness(data.lambda_minus, grid, rep.eq_tol, "A2", "Lambda_-")
    betas = _double_zero_witness(data.lambda_plus, grid, rep.eq_tol, "A2", "Lambda_+")
    if not alphas or not betas:
        _add(rep, "A2", None, 0.0, "H3/A2 witness not found: no zero of " + ("Lambda_-" if not alphas else "Lambda_+"))
        return
    pairs = [(x, y) for x in alphas for y in betas if x < y]
    if not pairs:
        _add(rep, "A2", alphas[0], betas[0], "no zero pair with alpha0 < beta0")
        return
    alpha0, beta0 = pairs[0]
    rep.witnesses.update(alpha0=alpha0, beta0=beta0)
    _check_value_zero(rep, data.lambda_minus, alpha0, "A2", "Lambda_-(alpha0)")
    _check_value_zero(rep, data.lambda_plus, beta0, "A2", "Lambda_+(beta0)")
    _check_touch(rep, data.lambda_minus, alpha0, "A3", "A4", -1, "Lambda_-")
    _check_touch(rep, data.lambda_plus, beta0, "A3", "A4", +1, "Lambda_+")


def _check_a_prime(data, grid, rep):
    alphas = _double_zero_witness(data.lambda_minus, grid, rep.eq_tol, "A2'", "Lambda_-")
    betas = _double_zero_witness(data.lambda_plus, grid, rep.eq_tol, "A2'", "Lambda_+")
    rep.witnesses.update(alphas=alphas, betas=betas)
    if not alphas or not betas:
        _add(rep, "A2'", None, 0.0, "H3/A2 witness not found")
        return
    pairs = [[x, y] for x in alphas for y in betas if x < y]
    rep.witnesses["pairs"] = pairs
    if not pairs:
        _add(rep, "A2'", None, 0.0, "no zero pair with alpha_i < beta_j")
    for x in alphas:
        _check_value_zero(rep, data.lambda_minus, x, "A2'", "Lambda_-(alpha_i)")
        _check_touch(rep, data.lambda_minus, x, "A3'", "A4'", -1, "Lambda_-")
    for y in betas:
        _check_value_zero(rep, data.lambda_plus, y, "A2'", "Lambda_+(beta_j)")
        _check_touch(rep, data.lambda_plus, y, "A3'", "A4'", +1, "Lambda_+")


def _plateau_grid_check(rep, curve, lo, hi, cond, label):
    sub = np.linspace(lo, hi, 101)
    v = np.abs(curve(sub))
    if v.max() > rep.eq_tol:
        i = int(np.argmax(v))
        _add(rep, cond, sub[i], v[i], f"{label} = 0 on plateau fails")


def _check_b_right(data, grid, rep):
    alphas = _double_zero_witness(data.lambda_minus, grid, rep.eq_tol, "B2", "Lambda_-")
    plats = plateaus(data.lambda_plus, grid, rep.eq_tol)
    if not alphas:
        _add(rep, "B2", None, 0.0, "H3/A2 witness not found: no zero of Lambda_-")
        return
    cands = [(x, p) for x in alphas for p in plats if x < p[0]]
    if not cands:
        _add(rep, "B2", None, 0.0, "no plateau of Lambda_+ to the right of a zero of Lambda_-")
        return
    alpha0, (beta0, beta_hat) = cands[0]
    rep.witnesses.update(alpha0=alpha0, beta0=beta0, beta_hat=beta_hat)
    _check_value_zero(rep, data.lambda_minus, alpha0, "B2", "Lambda_-(alpha0)")
    _plateau_grid_check(rep, data.lambda_plus, beta0, beta_hat, "B2", "Lambda_+")
    _check_touch(rep, data.lambda_minus, alpha0, "B3", "B4", -1, "Lambda_-")
    d1 = float(data.lambda_plus(beta0, 1))
    if abs(d1) > rep.eq_tol:
        _add(rep, "B3", beta0, d1, "Lambda_+'(beta0) = 0 fails")
    d2 = float(data.lambda_plus(beta0, 2))
    if abs(d2) > rep.eq_tol:
        _add(rep, "B4", beta0, d2, "Lambda_+''(beta0) = 0 fails")


def _check_b_left(data, grid, rep):
    betas = _double_zero_witness(data.lambda_plus, grid, rep.eq_tol, "B2", "Lambda_+")
    plats = plateaus(data.lambda_minus, grid, rep.eq_tol)
    if not betas:
        _add(rep, "B2", None, 0.0, "H3/A2 witness not found: no zero of Lambda_+")
        return
    cands = [(p, y) for y in betas for p in plats if p[1] < y]
    if not cands:
        _add(rep, "B2", None, 0.0, "no plateau of Lambda_- to the left of a zero of Lambda_+")
        return
    (alpha_hat, alpha0), beta0 = cands[0]
    rep.witnesses.update(alpha0=alpha0, beta0=beta0, alpha_hat=alpha_hat)
    _check_value_zero(rep, data.lambda_plus, beta0, "B2", "Lambda_+(beta0)")
    _plateau_grid_check(rep, data.lambda_minus, alpha_hat, alpha0, "B2", "Lambda_-")
    _check_touch(rep, data.lambda_plus, beta0, "B3", "B4", +1, "Lambda_+")
    d1 = float(data.lambda_minus(alpha0, 1))
    if abs(d1) > rep.eq_tol:
        _add(rep, "B3", alpha0, d1, "Lambda_-'(alpha0) = 0 fails")
    d2 = float(data.lambda_minus(alpha0, 2))
    if abs(d2) > rep.eq_tol:
        _add(rep, "B4", alpha0, d2, "Lambda_-''(alpha0) = 0 fails")


def _check_c(data, grid, rep):
    pm = plateaus(data.lambda_minus, grid, rep.eq_tol)
    pp = plateaus(data.lambda_plus, grid, rep.eq_tol)
    cands = [(p, q) for p in pm for q in pp if p[1] < q[0]]
    if not cands:
        _add(rep, "C2", None, 0.0, "no plateau pair with alpha-plateau left of beta-plateau")
        return
    (alpha_hat, alpha0), (beta0, beta_hat) = cands[0]
    rep.witnesses.update(alpha0=alpha0, beta0=beta0, alpha_hat=alpha_hat, beta_hat=beta_hat)
    _plateau_grid_check(rep, data.lambda_minus, alpha_hat, alpha0, "C2", "Lambda_-")
    _plateau_grid_check(rep, data.lambda_plus, beta0, beta_hat, "C2", "Lambda_+")
    for curve, x, label in ((data.lambda_minus, alpha0, "Lambda_-"), (data.lambda_plus, beta0, "Lambda_+")):
        d1 = float(curve(x, 1))
        if abs(d1) > rep.eq_tol:
            _add(rep, "C3", x, d1, f"{label}' = 0 fails")
        d2 = float(curve(x, 2))
        if abs(d2) > rep.eq_tol:
            _add(rep, "C4", x, d2, f"{label}'' = 0 fails")
