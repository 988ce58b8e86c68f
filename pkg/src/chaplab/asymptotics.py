"""Leading-order constants near the blowup point, the Cardano root for alpha~,
approach regimes, and blowup-rate exponents by log-log slope fitting.

Offsets are  t~ = t - t0,  x~ = x - x0,  a~ = alpha - alpha0,  b~ = beta - beta0.
All constants are computed in the Galilean frame where
Lambda_-(alpha0) = Lambda_+(beta0) = 0; in that frame x~ is measured along
x - c t with c the common value of the invariants at the witnesses.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .charmap import LocalChart, char_map, partials
from .errors import ConfigError, ConsistencyError, NearSingularError, NumericError
from .initial_data import InitialDataPair
from .singularity import SingularityReport

R_LOW = 0.1
R_HIGH = 10.0
J_DISCARD = 1e-12


def real_cbrt(v):
    """Real cube root, negative for negative input."""
    return np.cbrt(v)


# ---------------------------------------------------------------------------
# constants


@dataclass
class CoefficientSet:
    kind: str  # "H", "A", "B", "C"
    alpha0: float
    beta0: float
    shift: float  # Galilean shift c applied before evaluating the constants
    # cusp kind
    B1: float | None = None
    B2: float | None = None
    B3: float | None = None
    B3_printed: float | None = None  # bracket term with the opposite sign
    C1: float | None = None
    C2: float | None = None
    C3: float | None = None
    D1: float | None = None
    D2: float | None = None
    M: float | None = None
    C6: float | None = None
    C7: float | None = None
    # point kind (b~ is the unknown of the cubic)
    ratio: float | None = None  # Lambda_+(alpha0) / |Lambda_-(beta0)|
    cubic: tuple[float, float, float, float] | None = None  # c3, c2, c1, c0
    B7: float | None = None
    B8: float | None = None
    B9: float | None = None
    B10: float | None = None
    B11: float | None = None
    B12: float | None = None
    B14: float | None = None
    B15: float | None = None
    B17: float | None = None
    B18: float | None = None
    # line kind
    V1: float | None = None
    V2: float | None = None
    V1_leading: float | None = None
    V2_leading: float | None = None
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {k: v for k, v in asdict(self).items() if v is not None}


def _kind(report: SingularityReport) -> str:
    return {"cusp": "H", "point-shape": "A", "line-shape-I": "B", "line-shape-II": "C"}[report.kind]


def frame_shift(data: InitialDataPair, alpha0: float, beta0: float) -> float:
    """Common value of Lambda_-(alpha0) and Lambda_+(beta0), removed by the Galilean shift."""
    return 0.5 * float(data.lambda_minus(alpha0) + data.lambda_plus(beta0))


def compute_coefficients(data: InitialDataPair, report: SingularityReport) -> CoefficientSet:
    kind = _kind(report)
    a0, b0 = report.witnesses["alpha0"], report.witnesses["beta0"]
    c = frame_shift(data, a0, b0) if kind in ("H",) else 0.0
    d = data.shifted(c) if c != 0.0 else data
    lm, lp = d.lambda_minus, d.lambda_plus
    cs = CoefficientSet(kind, a0, b0, c)
    if kind == "H":
        a = float(lp(a0))  # Lambda_+(alpha0) > 0
        b = float(lm(b0))  # Lambda_-(beta0) < 0
        q = float(lp(b0, 1))
        bracket = (q - float(lm(b0, 1))) - (float(lp(a0, 1)) - float(lm(a0, 1)))
        n1 = float(lm(a0, 2)) * a * a - b * b * float(lp(b0, 2)) + q * b * bracket
        cs.B1 = -q * b / 2.0
        cs.B2 = float(lm(a0, 1))
        cs.B3 = -n1 / (6.0 * a**3)
        cs.B3_printed = -(float(lm(a0, 2)) * a * a - b * b * float(lp(b0, 2))) / (6.0 * a**3) + q * b * bracket / (
            6.0 * a**3
        )
        cs.C1 = cs.B2 / cs.B3
        cs.C2 = cs.B1 / cs.B3
        cs.C3 = -1.0 / cs.B3
        cs.D1 = -q * b
        cs.M = (float(lp(b0, 2)) * b * b - float(lm(a0, 2)) * a * a - q * b * bracket) / (2.0 * a * a)
        cs.D2 = cs.M * abs(cs.C3) ** (2.0 / 3.0)
        cs.C6 = 2.0 * q * b * cs.C3 / (a * cs.C1)
        cs.C7 = 2.0 * q * b / a * float(real_cbrt(cs.C3))
        checks = {"B1<0": cs.B1 < 0, "B2<0": cs.B2 < 0, "B3>0": cs.B3 > 0, "C1<0": cs.C1 < 0, "C2<0": cs.C2 < 0,
                  "C3<0": cs.C3 < 0, "M!=0": cs.M != 0}
        bad = [k for k, ok in checks.items() if not ok]
        if bad:
            raise ConsistencyError(f"cusp-kind sign invariants fail: {bad}")
    elif kind == "A":
        a = float(lp(a0))
        absb = -float(lm(b0))
        m2 = float(lm(a0, 2))
        p2 = float(lp(b0, 2))
        r = a / absb
        c3 = -m2 * r**3 / (6.0 * a) + p2 / (6.0 * absb)
        c2 = m2 * r * r / 2.0
        c1 = -m2 * r * a / 2.0
        c0 = m2 * a * a / 6.0
        cs.ratio, cs.cubic = r, (c3, c2, c1, c0)
        cs.B10 = c2 / c3
        cs.B9 = c1 / c3 - cs.B10**2 / 3.0
        cs.B8 = 2.0 * cs.B10**3 / 27.0 - cs.B10 * c1 / (3.0 * c3) + c0 / c3
        cs.B7 = -1.0 / c3
        s = _point_slope(cs, 0.0)
        cs.B11 = s
        cs.B12 = float(real_cbrt(1.0 / c3))
        cs.B14 = p2 * s * s / 2.0 - m2 * (r * s - a) ** 2 / 2.0
        cs.B17 = p2 * s * s / 2.0 + m2 * (r * s - a) ** 2 / 2.0
        cs.B15 = (p2 / 2.0 - m2 * r * r / 2.0) * cs.B12**2
        cs.B18 = (p2 / 2.0 + m2 * r * r / 2.0) * cs.B12**2
        cs.extra.update(m2=m2, p2=p2, a=a, absb=absb)
    elif kind == "B":
        m2 = float(lm(a0, 2))
        lp_a = float(lp(a0))
        if report.assumption_set == "B-right":
            # constants as stated for the line case, and the leading-order pair
            cs.V1 = float(real_cbrt(-6.0 * lp_a / (2.0 * m2 - float(lp(a0, 2)))))
            cs.V2 = -m2 * cs.V1**2 / 2.0
            cs.V1_leading = float(real_cbrt(-6.0 * lp_a / m2))
            cs.V2_leading = -m2 * cs.V1_leading**2 / 2.0
        else:
            # mirrored: b~ is the free offset and Lambda_+ carries the curvature
            p2 = float(lp(b0, 2))
            gap_b = float(d.gap(b0))
            cs.V1_leading = float(real_cbrt(6.0 * gap_b / p2))
            cs.V2_leading = p2 * cs.V1_leading**2 / 2.0
    return cs


def _point_slope(cs: CoefficientSet, kappa: float) -> float:
    """Real root s of c3 s^3 + c2 s^2 + c1 s + c0 = kappa (b~ = s t~ along x~ = kappa t~^3)."""
    c3, c2, c1, c0 = cs.cubic
    roots = np.roots([c3, c2, c1, c0 - kappa])
    real = roots[np.abs(roots.imag) <= 1e-9 * (1 + np.abs(roots.real))].real
    if real.size == 0:
        raise NumericError("point-kind cubic has no real root")
    # the physical branch keeps Lambda_+(beta) - Lambda_-(alpha) > 0; take the largest root
    return float(real.max())


# ---------------------------------------------------------------------------
# Cardano


@dataclass(frozen=True)
class CardanoRoot:
    alpha: float
    trig_branch: bool  # three real roots; the continuing one was picked


def cardano_alpha(cs: CoefficientSet, t_tilde: float, x_tilde: float) -> CardanoRoot:
    """a~ solving a~^3 + C1 t~ a~ + (C2 t~^2 + C3 x~) = 0.

    Two-cube-root form with the second root taken as -P/(3u) to avoid
    cancellation, then one Newton polish.  When the inner radicand is negative
    the trigonometric form is used and the root continuing the one-root
    branch (largest magnitude, sign of -Q) is returned, flagged.
    """
    if cs.kind != "H":
        raise ConfigError("cardano_alpha needs cusp-kind coefficients")
    P = cs.C1 * t_tilde
    Q = cs.C2 * t_tilde * t_tilde + cs.C3 * x_tilde
    if P == 0.0 and Q == 0.0:
        return CardanoRoot(0.0, False)
    # a~ = scale * y keeps P, Q of order one so Q^2 and P^3 neither underflow nor overflow
    scale = max(math.sqrt(abs(P)), float(real_cbrt(abs(Q))))
    P, Q = P / scale / scale, Q / scale / scale / scale
    disc = 0.25 * Q * Q + P**3 / 27.0
    trig = False
    if disc >= 0.0:
        A = -0.5 * Q
        sq = math.sqrt(disc)
        w = A + math.copysign(sq, A) if A != 0.0 else sq
        u = float(real_cbrt(w))
        y = float(real_cbrt(-Q)) if u == 0.0 else u - P / (3.0 * u)
    else:
        trig = True
        m = 2.0 * math.sqrt(-P / 3.0)
        theta = math.acos(max(-1.0, min(1.0, 3.0 * Q / (P * m))))
        roots = [m * math.cos((theta - 2.0 * math.pi * k) / 3.0) for k in range(3)]
        target = -Q if Q != 0.0 else 1.0
        same = [r for r in roots if r * target >= 0] or roots
        y = max(same, key=abs)
    f = y**3 + P * y + Q
    fp = 3.0 * y * y + P
    if fp != 0.0:
        y -= f / fp
    return CardanoRoot(scale * y, trig)


def cubic_residual(cs: CoefficientSet, alpha: float, t_tilde: float, x_tilde: float) -> float:
    """|B3 a~^3 + B2 t~ a~ + B1 t~^2 - x~| relative to max(|x~|, |B1 t~^2|)."""
    r = cs.B3 * alpha**3 + cs.B2 * t_tilde * alpha + cs.B1 * t_tilde**2 - x_tilde
    scale = max(abs(x_tilde), abs(cs.B1) * t_tilde**2)
    return abs(r) / scale if scale > 0 else abs(r)


# ---------------------------------------------------------------------------
# regimes


@dataclass(frozen=True)
class Regime:
    case: str  # "I", "II", "III"
    ratio: float


def classify_regime(kind: str, t_tilde: float, x_tilde: float, r_low: float = R_LOW, r_high: float = R_HIGH) -> Regime:
    """Case I if |x~|/|t~|^p < r_low, II if > r_high, else III; p = 3/2 (cusp) or 3 (point)."""
    if t_tilde == 0.0 and x_tilde == 0.0:
        raise ConfigError("regime undefined at the blowup point itself")
    p = {"H": 1.5, "cusp": 1.5, "A": 3.0, "point-shape": 3.0}.get(kind)
    if p is None:
        raise ConfigError(f"regimes are defined for cusp and point kinds, not {kind!r}")
    ratio = math.inf if t_tilde == 0.0 else abs(x_tilde) / abs(t_tilde) ** p
    case = "I" if ratio < r_low else ("II" if ratio > r_high else "III")
    return Regime(case, ratio)


# ---------------------------------------------------------------------------
# rate fits

QUANTITIES = ("rho", "u-deviation", "u_x", "u_t", "rho_x", "rho_t")

# bound exponents with respect to the path parameter (|t~| for I and III, |x~| for II)
EXPECTED = {
    ("H", "I"): {"rho": -1.0, "u-deviation": 1.0, "u_x": -1.0, "u_t": 0.0, "rho_x": -3.0, "rho_t": -2.0},
    ("H", "II"): {"rho": -2 / 3, "u-deviation": 1 / 3, "u_x": -2 / 3, "u_t": -1 / 3, "rho_x": -2.0, "rho_t": -5 / 3},
    ("H", "III"): {"rho": -1.0, "u-deviation": 0.5, "u_x": -1.0, "u_t": -0.5, "rho_x": -3.0, "rho_t": -2.5},
    ("A", "I"): {"rho": -2.0, "u-deviation": 2.0},
    ("A", "II"): {"rho": -2 / 3, "u-deviation": 2 / 3},
    ("A", "III"): {"rho": -2 / 3, "u-deviation": 2 / 3},
}

DEFAULT_RANGE = {
    ("H", "I"): (1e-6, 1e-2),
    ("H", "II"): (1e-12, 1e-6),
    ("H", "III"): (1e-8, 1e-3),
    ("A", "I"): (1e-5, 1e-2),
    ("A", "II"): (1e-12, 1e-6),
    ("A", "III"): (1e-5, 1e-2),
}


@dataclass
class RateReport:
    quantity: str
    path: str
    fitted_exponent: float
    expected_exponent: float | None
    r_squared: float
    n_points: int
    param_range: tuple[float, float]
    decades: float
    samples: list[dict] = field(default_factory=list)
    intercept: float = 0.0

    def passed(self, tol: float = 0.05, r2_min: float = 0.999) -> bool:
        return (
            self.expected_exponent is not None
            and abs(self.fitted_exponent - self.expected_exponent) <= tol
            and self.r_squared >= r2_min
            and self.n_points >= 8
            and self.decades >= 2.0
        )

    def to_dict(self) -> dict:
        d = asdict(self)
        d["passed"] = self.passed()
        return d


def loglog_fit(s, q) -> tuple[float, float, float]:
    """Least-squares slope, intercept and r^2 of log|q| against log s."""
    X = np.log(np.asarray(s, float))
    Y = np.log(np.abs(np.asarray(q, float)))
    slope, intercept = np.polyfit(X, Y, 1)
    resid = Y - (slope * X + intercept)
    ss_tot = float(np.sum((Y - Y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0 else 1.0
    return float(slope), float(intercept), r2


def _path_point(kind: str, case: str, s: float, kappa: float, side: float) -> tuple[float, float]:
    if case == "I":
        return -s, 0.0
    if case == "II":
        return 0.0, side * s
    p = 1.5 if kind == "H" else 3.0
    return -s, side * kappa * s**p


def predict_offsets(cs: CoefficientSet, chart: LocalChart, tt: float, xt: float) -> tuple[float, float]:
    """Leading-order (a~, b~) used to seed the first Newton solve on a path.

    For cusps b~ comes from the exact time equation at the predicted a~: the
    linearised b~ puts the seed on the fold itself, where J = 0.
    """
    if cs.kind == "H":
        al = cardano_alpha(cs, tt, xt).alpha
        d = chart.data
        a = float(d.lambda_plus(cs.alpha0))
        absb = -float(d.lambda_minus(cs.beta0))
        return al, chart.beta_for_time(al, tt, absb * (tt + al / a))
    if cs.kind == "A":
        if tt == 0.0:
            be = float(real_cbrt(xt / cs.cubic[0]))
        else:
            be = _point_slope(cs, xt / tt**3) * tt
        return cs.ratio * be - cs.extra["a"] * tt, be
    raise ConfigError("rate fits are defined for cusp and point kinds")


def sample_path(
    data: InitialDataPair,
    report: SingularityReport,
    case: str,
    s_values,
    kappa: float = 1.0,
    side: float = 1.0,
    cs: CoefficientSet | None = None,
) -> list[dict]:
    """Flow states at log-spaced offsets along a canonical path, largest offset first.

    Each solve is seeded by the previous one.  Points whose inversion stalls
    or whose |J| drops below 1e-12 are dropped.
    """
    cs = cs or compute_coefficients(data, report)
    kind = cs.kind
    d = data.shifted(cs.shift) if cs.shift != 0.0 else data
    chart = LocalChart(d, cs.alpha0, cs.beta0)
    s_values = np.sort(np.asarray(s_values, float))[::-1]
    u0 = 0.5 * float(data.lambda_minus(cs.alpha0) + data.lambda_plus(cs.beta0))
    out = []
    seed = None
    for s in s_values:
        tt, xt = _path_point(kind, case, float(s), kappa, side)
        if seed is None:
            seed = predict_offsets(cs, chart, tt, xt)
        try:
            da, db = chart.invert(tt, xt, seed)
        except NearSingularError:
            continue
        seed = (da, db)
        st = chart.state(da, db)
        if abs(float(st["jacobian"])) < J_DISCARD:
            continue
        row = {k: float(v) for k, v in st.items()}
        # back to the physical frame: u and x carry the shift
        row["u"] += cs.shift
        row["lambda_minus"] += cs.shift
        row["lambda_plus"] += cs.shift
        row.update(s=float(s), t_tilde=tt, x_tilde=xt + cs.shift * tt, alpha_tilde=da, beta_tilde=db)
        row["u-deviation"] = row["u"] - u0
        out.append(row)
    return out


def fit_rates(
    data: InitialDataPair,
    report: SingularityReport,
    quantity: str,
    path: str,
    samples: int = 16,
    s_range: tuple[float, float] | None = None,
    kappa: float = 1.0,
    side: float = 1.0,
) -> RateReport:
    """Fit the exponent of |quantity| along a canonical approach path.

    ``path`` is "I" (x~ = 0, t~ -> 0-), "II" (t~ = 0, x~ -> 0) or "III"
    (x~ = kappa |t~|^p, t~ -> 0-, p = 3/2 cusp, 3 point).  The path parameter
    is |t~| for I and III on cusps, |x~| for II, and |x~| for III on points.
    """
    if quantity not in QUANTITIES:
        raise ConfigError(f"unknown quantity {quantity!r}; known: {QUANTITIES}")
    if path not in ("I", "II", "III"):
        raise ConfigError("path must be 'I', 'II' or 'III'")
    if samples < 8:
        raise ConfigError("need at least 8 samples")
    cs = compute_coefficients(data, report)
    key = (cs.kind, path)
    if key not in DEFAULT_RANGE:
        raise ConfigError(f"no canonical paths for kind {cs.kind}")
    lo, hi = s_range or DEFAULT_RANGE[key]
    s_values = np.logspace(math.log10(lo), math.log10(hi), samples)
    rows = sample_path(data, report, path, s_values, kappa, side, cs)
    if cs.kind == "A" and path == "III":
        for r in rows:
            r["s"] = abs(r["x_tilde"] - cs.shift * r["t_tilde"])
    rows = [r for r in rows if r[quantity] != 0.0 and np.isfinite(r[quantity])]
    if len(rows) < 2:
        raise NumericError(f"too few usable samples for {quantity} along path {path}")
    s = np.array([r["s"] for r in rows])
    q = np.array([r[quantity] for r in rows])
    slope, icpt, r2 = loglog_fit(s, q)
    expected = EXPECTED[key].get(quantity)
    desc = {"I": "x~ = 0, t~ -> 0-", "II": f"t~ = 0, x~ -> 0{'+' if side > 0 else '-'}",
            "III": f"x~ = {kappa} |t~|^{1.5 if cs.kind == 'H' else 3}, t~ -> 0-"}[path]
    return RateReport(
        quantity,
        f"case {path}: {desc}",
        slope,
        expected,
        r2,
        len(rows),
        (float(s.min()), float(s.max())),
        float(math.log10(s.max() / s.min())),
        [{"s": r["s"], "value": r[quantity], "t_tilde": r["t_tilde"], "x_tilde": r["x_tilde"]} for r in rows],
        icpt,
    )


# ---------------------------------------------------------------------------
# leading-order predictions against exact values


@dataclass
class GapItem:
    name: str
    predicted: float
    exact: float

    @property
    def rel_dev(self) -> float:
        return abs(self.predicted - self.exact) / max(abs(self.exact), 1e-300)


@dataclass
class GapReport:
    regime: str
    t_tilde: float
    x_tilde: float
    items: list[GapItem]

    def deviation(self, name: str) -> float:
        return next(i.rel_dev for i in self.items if i.name == name)

    def to_dict(self) -> dict:
        return {
            "regime": self.regime,
            "t_tilde": self.t_tilde,
            "x_tilde": self.x_tilde,
            "items": [{"name": i.name, "predicted": i.predicted, "exact": i.exact, "rel_dev": i.rel_dev} for i in self.items],
        }


def check_gap_quantities(
    data: InitialDataPair,
    report: SingularityReport,
    regime: str,
    point: tuple[float, float],
    seed: tuple[float, float] | None = None,
    line_t: float | None = None,
) -> GapReport:
    """Compare leading-order a~, Lambda_+(beta) -/+ Lambda_-(alpha) with the exact inverse at ``point``.

    ``point`` is (t~, x~) in the shifted frame.  For line kinds ``line_t`` picks the
    point (line_t, x0) on L and ``point`` is (0, x~) relative to it.
    """
    cs = compute_coefficients(data, report)
    d = data.shifted(cs.shift) if cs.shift != 0.0 else data
    tt, xt = point
    items: list[GapItem] = []
    if cs.kind in ("H", "A"):
        chart = LocalChart(d, cs.alpha0, cs.beta0)
        da, db = chart.invert(tt, xt, seed or predict_offsets(cs, chart, tt, xt))
        st = chart.state(da, db)
        gap = 2.0 * d.mu / float(st["rho"])
        total = float(st["lambda_plus"] + st["lambda_minus"])
        if cs.kind == "H":
            if regime == "I":
                pa = -cs.C2 / cs.C1 * tt - cs.C3 * xt / (cs.C1 * tt)
                pg = cs.D1 * tt
                ps = cs.C6 * xt / tt
            elif regime == "II":
                pa = float(real_cbrt(-cs.C3 * xt))
                pg = cs.D2 * abs(xt) ** (2.0 / 3.0)
                ps = cs.C7 * float(real_cbrt(xt))
            else:
                o1 = xt / abs(tt) ** 1.5
                obar = 4.0 * cs.C1**3 * math.copysign(1.0, tt) / (27.0 * cs.C3**2 * o1**2)
                root = math.sqrt(1.0 + obar) if obar >= -1.0 else 0.0
                C = float(real_cbrt(1.0 + root) + real_cbrt(1.0 - root))
                pa = C * float(real_cbrt(-0.5 * cs.C3 * xt))
                pg = cs.D1 * tt + cs.M * pa * pa
                # Lambda_+(beta) + Lambda_-(alpha) ~ -2 Lambda_+'(beta0) Lambda_-(beta0) a~ / Lambda_+(alpha0)
                ps = 4.0 * cs.B1 / float(d.lambda_plus(cs.alpha0)) * pa
            items = [GapItem("alpha_tilde", pa, da), GapItem("gap", pg, gap), GapItem("sum", ps, total)]
        else:
            m2, p2, a, r = cs.extra["m2"], cs.extra["p2"], cs.extra["a"], cs.ratio
            if regime == "I":
                pb, pg, ps = cs.B11 * tt, cs.B14 * tt * tt, cs.B17 * tt * tt
            elif regime == "II":
                x3 = float(real_cbrt(xt))
                pb, pg, ps = cs.B12 * x3, cs.B15 * x3 * x3, cs.B18 * x3 * x3
            else:
                kappa = xt / tt**3
                s = _point_slope(cs, kappa)
                x3 = float(real_cbrt(xt))
                b13 = s / float(real_cbrt(kappa))
                pb = b13 * x3
                pa_ = r * s - a
                pg = (p2 * s * s / 2.0 - m2 * pa_**2 / 2.0) * tt * tt
                ps = (p2 * s * s / 2.0 + m2 * pa_**2 / 2.0) * tt * tt
            items = [GapItem("beta_tilde", pb, db), GapItem("gap", pg, gap), GapItem("sum", ps, total)]
        return GapReport(regime, tt, xt, items)
    if cs.kind == "B":
        if line_t is None:
            raise ConfigError("line kinds need line_t, a time on the singular line")
        cm = char_map(d)
        right = report.assumption_set == "B-right"
        if right:
            base_b = float(cm.beta_on_slice(line_t, np.array(cs.alpha0)))
            chart = LocalChart(d, cs.alpha0, base_b)
        else:
            base_a = float(cm.alpha_on_slice(line_t, np.array(cs.beta0)))
            chart = LocalChart(d, base_a, cs.beta0)
        guess = float(real_cbrt(xt)) * cs.V1_leading
        da, db = chart.invert(0.0, xt, seed or ((guess, 0.0) if right else (0.0, guess)))
        st = chart.state(da, db)
        gap = 2.0 * d.mu / float(st["rho"])
        total = float(st["lambda_plus"] + st["lambda_minus"])
        x3 = float(real_cbrt(xt))
        free = da if right else db
        items = [
            GapItem("offset_leading", cs.V1_leading * x3, free),
            GapItem("gap_leading", cs.V2_leading * x3 * x3, gap),
            GapItem("sum_leading", -cs.V2_leading * x3 * x3, total),
        ]
        if cs.V1 is not None:
            items += [
                GapItem("offset_stated", cs.V1 * x3, free),
                GapItem("gap_stated", cs.V2 * x3 * x3, gap),
                GapItem("sum_stated", -cs.V2 * x3 * x3, total),
            ]
        return GapReport("line", 0.0, xt, items)
    raise ConfigError("no leading-order gap predictions for this kind")
