"""Weak-form checks: test-function residuals with excised singular regions,
epsilon sweeps, one-sided limits across a singular line, and mass in a window.

Integrals over x at fixed t are taken along the slice parametrised by beta.
On a slice dx = Delta / D(beta) d(beta) with Delta = Lambda_+(beta) - Lambda_-(alpha),
so every flux picks up a factor that cancels the 1/Delta of the density:

    rho dx        = 2 mu / D(beta) d(beta)
    rho u dx      = 2 mu u / D(beta) d(beta)
    (rho u^2 + p) dx = (2 mu u^2 + p0 Delta - mu Delta^2 / 2) / D(beta) d(beta)

The integrands are smooth in beta even where rho blows up.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .charmap import LocalChart, PhysCoord, char_map, state_from_chars
from .errors import ConfigError, DomainError, NumericError
from .initial_data import InitialDataPair
from .quadrature import gk15
from .singularity import SingularityReport, analyze

ENVELOPE_FACTOR = 12.0


@dataclass(frozen=True)
class TestFunction:
    """phi = (1 - r^2)^3 for r < 1, zero outside; r = |(t, x) - center| / radius."""

    __test__ = False  # keep pytest from collecting this class

    center: PhysCoord
    radius: float

    def __post_init__(self):
        if not self.radius > 0:
            raise ConfigError("test-function radius must be positive")

    def _r2(self, t, x):
        return ((t - self.center.t) ** 2 + (x - self.center.x) ** 2) / self.radius**2

    def value(self, t, x):
        w = np.clip(1.0 - self._r2(t, x), 0.0, None)
        return w**3

    def grad(self, t, x):
        w = np.clip(1.0 - self._r2(t, x), 0.0, None)
        k = -6.0 * w * w / self.radius**2
        return k * (t - self.center.t), k * (x - self.center.x)

    @property
    def max_abs(self) -> float:
        return 1.0

    def x_range(self, t: float) -> tuple[float, float] | None:
        s = t - self.center.t
        h2 = self.radius**2 - s * s
        if h2 <= 0:
            return None
        h = math.sqrt(h2)
        return self.center.x - h, self.center.x + h


@dataclass(frozen=True)
class Excision:
    """Closed box [t_lo, t_hi] x [x_lo, x_hi] removed from the integration domain."""

    t_lo: float
    t_hi: float
    x_lo: float
    x_hi: float

    @classmethod
    def box(cls, t0: float, x0: float, eps: float) -> "Excision":
        return cls(t0 - eps, t0 + eps, x0 - eps, x0 + eps)

    @classmethod
    def slab(cls, t0: float, t_hat: float, x0: float, eps: float) -> "Excision":
        return cls(t0 - eps, t_hat + eps, x0 - eps, x0 + eps)


# ---------------------------------------------------------------------------
# slices


class Slice:
    """The curve t = const in characteristic coordinates, parametrised by beta."""

    def __init__(self, data: InitialDataPair, t: float):
        self.data = data
        self.cm = char_map(data)
        self.t = float(t)
        if t == 0.0:
            self.lo, self.hi = data.window
        else:
            self.lo, self.hi = self.cm.slice_beta_range(self.t)

    def alpha(self, beta):
        if self.t == 0.0:
            return np.asarray(beta, float)
        return self.cm.alpha_on_slice(self.t, np.asarray(beta, float))

    def x(self, beta):
        beta = np.asarray(beta, float)
        return self.cm.forward(self.alpha(beta), beta)[1]

    def beta_for_x(self, x_target, iters: int = 200):
        """beta with x(beta) = x_target; x is nondecreasing in beta on the physical sheet."""
        x_target = np.atleast_1d(np.asarray(x_target, float))
        lo = np.full_like(x_target, self.lo)
        hi = np.full_like(x_target, self.hi)
        x_lo, x_hi = self.x(np.array([self.lo, self.hi]))
        if np.any(x_target < x_lo) or np.any(x_target > x_hi):
            raise DomainError(f"x outside the image of the window at t = {self.t}")
        b = lo + (hi - lo) * (x_target - x_lo) / max(x_hi - x_lo, 1e-300)
        for _ in range(iters):
            al = self.alpha(b)
            r = self.cm.forward(al, b)[1] - x_target
            lo = np.where(r < 0, b, lo)
            hi = np.where(r > 0, b, hi)
            slope = (self.data.lambda_plus(b) - self.data.lambda_minus(al)) / self.data.gap(b)
            with np.errstate(divide="ignore", invalid="ignore"):
                nb = b - r / slope
            bad = ~np.isfinite(nb) | (nb <= lo) | (nb >= hi)
            nb = np.where(bad, 0.5 * (lo + hi), nb)
            done = (np.abs(nb - b) <= 2e-16 * (1 + np.abs(b))) | (r == 0)
            b = nb
            if done.all():
                break
        return b

    def fluxes(self, beta):
        """Per-d(beta) densities of rho, rho u, rho u^2 + p along the slice, and x(beta)."""
        beta = np.asarray(beta, float)
        al = self.alpha(beta)
        x = self.cm.forward(al, beta)[1]
        d = self.data
        lm, lp = d.lambda_minus(al), d.lambda_plus(beta)
        db = d.gap(beta)
        u = 0.5 * (lp + lm)
        delta = lp - lm
        m = 2.0 * d.mu / db
        return x, m, m * u, (2.0 * d.mu * u * u + d.p0 * delta - 0.5 * d.mu * delta * delta) / db


def _x_intervals(phi: TestFunction, t: float, excision: Excision | None):
    xr = phi.x_range(t)
    if xr is None:
        return []
    a, b = xr
    if excision is None or not (excision.t_lo <= t <= excision.t_hi):
        return [(a, b)]
    out = []
    if a < excision.x_lo:
        out.append((a, min(b, excision.x_lo)))
    if b > excision.x_hi:
        out.append((max(a, excision.x_hi), b))
    return out


def _slice_integrals(data, phi, t, intervals, tol, with_phi_value=False):
    """(mass, momentum) integrands of the weak form integrated over x-intervals at time t."""
    if not intervals:
        return 0.0, 0.0
    sl = Slice(data, t)
    ends = sl.beta_for_x(np.array([v for iv in intervals for v in iv]))
    mass = mom = 0.0
    for k in range(len(intervals)):
        b0, b1 = ends[2 * k], ends[2 * k + 1]
        if b1 <= b0:
            continue
        cache = {}

        def parts(beta):
            key = beta.tobytes()
            if key not in cache:
                x, f_rho, f_m, f_flux = sl.fluxes(beta)
                if np.any(np.diff(x) < -1e-12):
                    raise DomainError(
                        f"slice t = {t} folds over itself (multivalued region); lower the strip top or enlarge the excision"
                    )
                if with_phi_value:
                    v = phi.value(t, x)
                    cache[key] = (f_rho * v, f_m * v)
                else:
                    pt, px = phi.grad(t, x)
                    cache[key] = (f_rho * pt + f_m * px, f_m * pt + f_flux * px)
            return cache[key]

        mass += gk15(lambda b: parts(b)[0], b0, b1, tol)[0]
        mom += gk15(lambda b: parts(b)[1], b0, b1, tol)[0]
    return mass, mom


def support_fits(data: InitialDataPair, center: PhysCoord, radius: float, levels: int = 33) -> bool:
    """Whether every time level of the disc (t >= 0 part) lies inside the slice image."""
    for th in np.linspace(-0.5 * math.pi, 0.5 * math.pi, levels):
        t = center.t + radius * math.sin(th)
        if t < 0.0:
            continue
        h = radius * math.cos(th)
        try:
            sl = Slice(data, t)
            x_lo, x_hi = sl.x(np.array([sl.lo, sl.hi]))
        except NumericError:
            return False
        if not (x_lo <= center.x - h and center.x + h <= x_hi):
            return False
    return True


def admissible_radius(data: InitialDataPair, center: PhysCoord, r_max: float, shrink: float = 0.8, tries: int = 40) -> float:
    """Largest r_max * shrink^k whose disc around ``center`` fits the slice image."""
    r = float(r_max)
    for _ in range(tries):
        if support_fits(data, center, r):
            return r
        r *= shrink
    raise DomainError(f"no test-function radius up to {r_max} fits the slice image around ({center.t}, {center.x})")


def weak_residual(
    data: InitialDataPair,
    phi: TestFunction,
    excision: Excision | None = None,
    t_top: float | None = None,
    tol: float = 1e-11,
) -> tuple[float, float]:
    """Mass and momentum residuals of the weak form for one test function.

        R_m = iint (rho phi_t + rho u phi_x) + int rho0 phi(0, x) dx - int rho phi(t_top, x) dx
        R_p = iint (rho u phi_t + (rho u^2 + p) phi_x) + int rho0 u0 phi(0, x) dx - int rho u phi(t_top, x) dx

    over the support intersected with 0 <= t <= t_top, minus ``excision``.
    The boundary terms appear only where the support reaches t = 0 or t_top.
    """
    c, R = phi.center, phi.radius
    t_lo = max(0.0, c.t - R)
    t_hi = c.t + R if t_top is None else min(c.t + R, t_top)
    if t_hi <= t_lo:
        return 0.0, 0.0
    # t = c.t + R sin(theta) absorbs the square-root behaviour at the support edges
    breaks = {t_lo, t_hi}
    if excision is not None:
        breaks |= {v for v in (excision.t_lo, excision.t_hi) if t_lo < v < t_hi}
    ts = sorted(breaks)
    thetas = [math.asin(max(-1.0, min(1.0, (v - c.t) / R))) for v in ts]
    mass = mom = 0.0
    for th0, th1 in zip(thetas[:-1], thetas[1:]):
        mid_t = c.t + R * math.sin(0.5 * (th0 + th1))
        store = {}

        def inner(theta_arr):
            key = theta_arr.tobytes()
            if key not in store:
                vals = np.empty((2, theta_arr.size))
                for i, th in enumerate(theta_arr):
                    t = c.t + R * math.sin(th)
                    # the panel interior decides membership in the excision band
                    iv = _x_intervals(phi, t, excision if _inside_band(excision, mid_t) else None)
                    m, p = _slice_integrals(data, phi, t, iv, 0.1 * tol)
                    jac = R * math.cos(th)
                    vals[:, i] = m * jac, p * jac
                store[key] = vals
            return store[key]

        mass += gk15(lambda th: inner(th)[0], th0, th1, tol)[0]
        mom += gk15(lambda th: inner(th)[1], th0, th1, tol)[0]
    if t_lo == 0.0:
        m, p = _slice_integrals(data, phi, 0.0, _x_intervals(phi, 0.0, excision), 0.1 * tol, True)
        mass += m
        mom += p
    if t_top is not None and t_hi == t_top and c.t + R > t_top:
        m, p = _slice_integrals(data, phi, t_top, _x_intervals(phi, t_top, excision), 0.1 * tol, True)
        mass -= m
        mom -= p
    return float(mass), float(mom)


def _inside_band(excision: Excision | None, t: float) -> bool:
    return excision is not None and excision.t_lo <= t <= excision.t_hi


# ---------------------------------------------------------------------------
# sweeps


@dataclass
class ResidualSweep:
    epsilons: list[float]
    mass_residuals: list[float]
    momentum_residuals: list[float]
    fitted_order: float
    fitted_order_momentum: float
    extrapolated_mass: float
    extrapolated_momentum: float
    envelope: list[float]  # 12 max|phi| eps^(1/3)
    region: str
    monotone: bool
    flags: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)


def aitken(seq) -> float:
    """Aitken delta-squared limit of the last three terms (the last term if the second difference vanishes)."""
    if len(seq) < 3:
        return float(seq[-1])
    a, b, c = (float(v) for v in seq[-3:])
    den = (c - b) - (b - a)
    if den == 0.0 or not np.isfinite(den):
        return c
    return c - (c - b) ** 2 / den


def _order(eps, vals) -> float:
    v = np.abs(np.asarray(vals, float))
    if np.any(v == 0) or len(v) < 2:
        return float("nan")
    return float(np.polyfit(np.log(eps), np.log(v), 1)[0])


def default_region(data: InitialDataPair, report: SingularityReport | None = None):
    """('box' | 'slab', report, strip top) for the first singularity of ``data``."""
    report = report or analyze(data)[0]
    t0, x0 = report.blowup.t, report.blowup.x
    if report.kind in ("line-shape-I", "line-shape-II"):
        return "slab", report, None
    if report.kind == "cusp":
        return "box", report, t0
    return "box", report, None


def epsilon_sweep(
    data: InitialDataPair,
    phi: TestFunction,
    epsilons,
    report: SingularityReport | None = None,
    tol: float = 1e-11,
) -> ResidualSweep:
    """Residuals with the blowup box (point, cusp) or the slab around L (line) excised, for each epsilon.

    For a cusp the domain is the strip t <= t0, with the top boundary term.
    """
    eps = [float(e) for e in epsilons]
    if any(b >= a for a, b in zip(eps, eps[1:])):
        raise ConfigError("epsilons must be strictly decreasing")
    if not eps or eps[-1] <= 0:
        raise ConfigError("epsilons must be positive")
    region, report, t_top = default_region(data, report)
    t0, x0 = report.blowup.t, report.blowup.x
    masses, moms = [], []
    for e in eps:
        if region == "slab":
            exc = Excision.slab(t0, report.line_extent[1], x0, e)
        else:
            exc = Excision.box(t0, x0, e)
        m, p = weak_residual(data, phi, exc, t_top, tol)
        masses.append(m)
        moms.append(p)
    am, ap = np.abs(masses), np.abs(moms)
    monotone = bool(np.all(np.diff(am) < 0))
    flags = [] if monotone else ["non-monotone |mass residual|"]
    # residuals at rounding level (symmetric data) carry no ordering
    if np.max(ap) > tol and not np.all(np.diff(ap) < 0):
        flags.append("non-monotone |momentum residual|")
    return ResidualSweep(
        eps,
        masses,
        moms,
        _order(eps, masses),
        _order(eps, moms),
        aitken(masses),
        aitken(moms),
        [ENVELOPE_FACTOR * phi.max_abs * e ** (1.0 / 3.0) for e in eps],
        region + (" in strip t <= t0" if t_top is not None else ""),
        monotone,
        flags,
    )


# ---------------------------------------------------------------------------
# one-sided limits across L


def richardson(deltas, values, exponents) -> float:
    """Limit L of values ~ L + sum_k c_k delta^p_k, from len(exponents) + 1 samples."""
    d = np.asarray(deltas, float)
    A = np.column_stack([np.ones_like(d)] + [d**p for p in exponents])
    sol, *_ = np.linalg.lstsq(A, np.asarray(values, float), rcond=None)
    return float(sol[0])


def vanishing_order(curve, edge: float, side: float, h: float = 1e-3) -> int:
    """Order n with |curve(edge + side s)| ~ s^n as s -> 0+."""
    v1 = abs(float(curve(edge + side * h)))
    v2 = abs(float(curve(edge + 2.0 * side * h)))
    if v1 == 0.0 or v2 == 0.0:
        return 0
    return int(round(math.log2(v2 / v1)))


def line_exponents(data: InitialDataPair, report: SingularityReport) -> list[float]:
    """Leading two exponents of u(x0 +- delta) - u+- in powers of delta.

    An invariant leaving its zero like s^n at a line end makes x~ ~ s^(n+1), so
    the expansion runs in delta^(1/(n+1)) starting at delta^(n/(n+1)).
    """
    w = report.witnesses
    lm, lp = data.lambda_minus, data.lambda_plus
    if report.assumption_set == "B-left":
        edges = [(lp, w["beta0"], 1.0), (lp, w["beta0"], -1.0)]
    elif report.assumption_set == "C":
        edges = [(lm, w["alpha0"], 1.0), (lm, w["alpha_hat"], -1.0), (lp, w["beta0"], -1.0), (lp, w["beta_hat"], 1.0)]
    else:
        edges = [(lm, w["alpha0"], 1.0), (lm, w["alpha0"], -1.0)]
    orders = [n for n in (vanishing_order(c, e, sd) for c, e, sd in edges) if n > 0]
    n = min(orders) if orders else 2
    return [n / (n + 1.0), 1.0]


def state_on_slice(data: InitialDataPair, t: float, x) -> dict:
    """Flow state at (t, x) found by root-finding x along the slice (valid after blowup off L)."""
    sl = Slice(data, t)
    b = sl.beta_for_x(x)
    return state_from_chars(data, sl.alpha(b), b)


@dataclass
class ContactSample:
    t: float
    u_minus: list[float]
    u_plus: list[float]
    u_minus_limit: float
    u_plus_limit: float
    rho_minus: list[float]
    rho_plus: list[float]
    rho_u_minus: list[float]
    rho_u_plus: list[float]
    rho_u_minus_limit: float
    rho_u_plus_limit: float


@dataclass
class ContactReport:
    applicable: bool
    x0: float = float("nan")
    line_speed: float = 0.0  # L is x = x0
    deltas: list[float] = field(default_factory=list)
    samples: list[ContactSample] = field(default_factory=list)
    max_jump: float = 0.0
    max_abs_limit: float = 0.0
    sup_abs_rho_u: float = 0.0
    tol: float = 1e-4

    @property
    def passed(self) -> bool:
        if not self.applicable:
            return True
        bound = 2.0 * self.mu_bound
        return self.max_jump <= self.tol and self.max_abs_limit <= self.tol and self.sup_abs_rho_u <= bound + 1e-6

    mu_bound: float = 1.0

    def to_dict(self) -> dict:
        d = asdict(self)
        d["passed"] = self.passed
        return d


def rankine_hugoniot_check(
    data: InitialDataPair,
    report: SingularityReport | None = None,
    t_samples=None,
    deltas=(1e-2, 1e-3, 1e-4),
    n_samples: int = 10,
    tol: float = 1e-4,
) -> ContactReport:
    """One-sided limits of u and rho u on either side of the singular line.

    Limits are Richardson-extrapolated over ``deltas`` with the exponents of
    ``line_exponents``.  Returns an inapplicable report when the singular set
    is not a line.
    """
    if report is None:
        reports = analyze(data)
        lines = [r for r in reports if r.kind in ("line-shape-I", "line-shape-II")]
        if not lines:
            return ContactReport(False)
        report = lines[0]
    if report.kind not in ("line-shape-I", "line-shape-II"):
        return ContactReport(False)
    t0, x0 = report.blowup.t, report.blowup.x
    t_hat = report.line_extent[1]
    if t_samples is None:
        t_samples = t0 + (t_hat - t0) * (np.arange(1, n_samples + 1) / (n_samples + 1))
    deltas = [float(d) for d in deltas]
    dl = np.array(deltas)
    out = ContactReport(True, x0, 0.0, deltas, tol=tol, mu_bound=data.mu)
    sup_probe = np.logspace(-6, -1, 26)
    ex = line_exponents(data, report)
    if len(deltas) < len(ex) + 1:
        raise ConfigError(f"need at least {len(ex) + 1} deltas")

    def lim(v):
        return richardson(deltas, v, ex)

    for t in np.asarray(t_samples, float):
        left = state_on_slice(data, float(t), x0 - dl)
        right = state_on_slice(data, float(t), x0 + dl)
        ru_l = left["rho"] * left["u"]
        ru_r = right["rho"] * right["u"]
        s = ContactSample(
            float(t),
            left["u"].tolist(),
            right["u"].tolist(),
            lim(left["u"]),
            lim(right["u"]),
            left["rho"].tolist(),
            right["rho"].tolist(),
            ru_l.tolist(),
            ru_r.tolist(),
            lim(ru_l),
            lim(ru_r),
        )
        out.samples.append(s)
        out.max_jump = max(out.max_jump, abs(s.u_plus_limit - s.u_minus_limit))
        out.max_abs_limit = max(out.max_abs_limit, abs(s.u_plus_limit), abs(s.u_minus_limit))
        sl = Slice(data, float(t))
        x_lo, x_hi = sl.x(np.array([sl.lo, sl.hi]))
        room = 0.9 * min(x0 - x_lo, x_hi - x0)
        pr = sup_probe[sup_probe < room]
        probe = state_on_slice(data, float(t), np.concatenate([x0 - pr, x0 + pr]))
        out.sup_abs_rho_u = max(out.sup_abs_rho_u, float(np.max(np.abs(probe["rho"] * probe["u"]))))
    return out


# ---------------------------------------------------------------------------
# mass


def _singular_x(data: InitialDataPair, t: float, lead: float = 0.0) -> list[tuple[float, SingularityReport]]:
    """Blowup abscissae whose singular time range, extended ``lead`` backwards, contains t."""
    try:
        reports = analyze(data)
    except (DomainError, NumericError):
        return []
    out = []
    for r in reports:
        t_end = r.line_extent[1] if r.line_extent else r.blowup.t
        if r.blowup.t - lead - 1e-12 <= t <= t_end + 1e-12:
            out.append((r.blowup.x, r))
    return out


def _local_chart_at(data: InitialDataPair, report: SingularityReport, t: float):
    """Chart based at a preimage of (t, x0), the time offset to use in it, and a seeding rule."""
    from .asymptotics import compute_coefficients, predict_offsets, real_cbrt

    a0, b0 = report.witnesses["alpha0"], report.witnesses["beta0"]
    cs = compute_coefficients(data, report)
    if t <= report.blowup.t + 1e-12:
        d = data.shifted(cs.shift) if cs.shift != 0.0 else data
        chart = LocalChart(d, a0, b0)
        tt = t - report.blowup.t
        if report.kind in ("cusp", "point-shape"):
            # x~ in the shifted frame differs from the physical one by shift * t~
            return chart, tt, lambda xt: predict_offsets(cs, chart, tt, xt - cs.shift * tt), cs.shift * tt
        return chart, tt, lambda xt: (cs.V1_leading * float(real_cbrt(xt)), 0.0), 0.0
    cm = char_map(data)
    if report.assumption_set == "B-left":
        chart = LocalChart(data, float(cm.alpha_on_slice(t, np.array(b0))), b0)
        return chart, 0.0, lambda xt: (0.0, cs.V1_leading * float(real_cbrt(xt))), 0.0
    chart = LocalChart(data, a0, float(cm.beta_on_slice(t, np.array(a0))))
    return chart, 0.0, lambda xt: (cs.V1_leading * float(real_cbrt(xt)), 0.0), 0.0


def _rho_local(chart: LocalChart, xt_values, tt: float, first_seed, x_shift: float) -> np.ndarray:
    """rho at offsets x~ (same sign, ordered by |x~| decreasing) with continuation seeds."""
    out = np.empty(len(xt_values))
    seed = None
    for i, xt in enumerate(xt_values):
        xs = xt - x_shift
        da, db = chart.invert(tt, xs, first_seed(xt) if seed is None else seed)
        seed = (da, db)
        out[i] = float(chart.state(da, db)["rho"])
    return out


def mass_window(
    data: InitialDataPair,
    t: float,
    window: tuple[float, float],
    levels: int = 40,
    shrink: float = 0.25,
    core: float = 1e-3,
    quad_n: int = 16,
    lead: float = 0.05,
) -> float:
    """Integral of rho(t, x) over [x1, x2].

    Away from a singular abscissa x0 the window is split into panels of width
    ``core`` or less with a ``quad_n``-point Gauss rule.  Around x0 shells
    [core * shrink^(k+1), core * shrink^k] on each side are added for k < levels;
    rho there is evaluated in offsets around x0 so shells far below the
    resolution of x0 itself stay accurate.  Adding shells only adds positive
    mass, so the value is nondecreasing in ``levels``.  The same refinement is
    used for times up to ``lead`` before the blowup, where rho is finite but
    sharply peaked.

    Mass carried by a segment of the slice mapped onto L itself (both invariants
    flat there) is not a density and is reported by ``concentrated_mass``.
    """
    x1, x2 = map(float, window)
    if not x2 > x1:
        raise ConfigError("window must have x1 < x2")
    sing = [(x0, r) for x0, r in _singular_x(data, t, lead) if x1 < x0 < x2]
    if any(r.kind == "line-shape-II" for _x0, r in sing):
        raise DomainError("the density next to a line carrying concentrated mass is not resolved by mass_window")
    nodes, weights = np.polynomial.legendre.leggauss(quad_n)
    cuts = [x1, x2]
    for x0, _r in sing:
        cuts += [x0 - core, x0 + core]
    cuts = sorted(c for c in set(cuts) if x1 <= c <= x2)
    pieces = []
    for a, b in zip(cuts[:-1], cuts[1:]):
        if any(x0 - core - 1e-15 <= a and b <= x0 + core + 1e-15 for x0, _r in sing):
            continue
        m = max(1, int(math.ceil((b - a) / max(core, (x2 - x1) / 64))))
        edges = np.linspace(a, b, m + 1)
        for lo, hi in zip(edges[:-1], edges[1:]):
            pieces.append((lo, hi))
    xs = np.concatenate([0.5 * (hi - lo) * nodes + 0.5 * (hi + lo) for lo, hi in pieces]) if pieces else np.array([])
    ws = np.concatenate([0.5 * (hi - lo) * weights for lo, hi in pieces]) if pieces else np.array([])
    total = float(np.sum(ws * state_on_slice(data, t, xs)["rho"])) if xs.size else 0.0
    for x0, rep in sing:
        chart, tt, first_seed, x_shift = _local_chart_at(data, rep, t)
        for side in (-1.0, 1.0):
            lim = (x0 - x1) if side < 0 else (x2 - x0)
            h = min(core, lim)
            offs, wts = [], []
            for _k in range(levels):
                lo = h * shrink
                offs.append(side * (0.5 * (h - lo) * nodes[::-1] + 0.5 * (h + lo)))
                wts.append(0.5 * (h - lo) * weights[::-1])
                h = lo
            offs = np.concatenate(offs)
            wts = np.concatenate(wts)
            rho = _rho_local(chart, offs, tt, first_seed, x_shift)
            # empirical order over the innermost two shells
            inner = slice(-2 * quad_n, None)
            order = np.polyfit(np.log(np.abs(offs[inner])), np.log(rho[inner]), 1)[0]
            if order <= -1.0:
                raise NumericError(f"density diverges like |x - x0|^{order:.2f}; not integrable")
            total += float(np.sum(wts * rho))
    return total


def concentrated_mass(data: InitialDataPair, t: float) -> float:
    """Mass 2 mu int d(beta)/D(beta) over the slice segment mapped onto a singular line at time t."""
    total = 0.0
    for x0, rep in _singular_x(data, t):
        if rep.kind != "line-shape-II" or t <= rep.blowup.t:
            continue
        sl = Slice(data, t)
        tab = sl.cm.table
        lo, hi = sl.beta_for_x(np.array([x0 - 1e-13, x0 + 1e-13]))
        total += 2.0 * data.mu * float(tab.eval_T(np.array(hi)) - tab.eval_T(np.array(lo)))
    return total
