"""Singular set of the characteristic map, fold/cusp classification, blowup point,
envelope branches and life span.

Sigma = {(alpha, beta): alpha < beta, Lambda_-(alpha) = Lambda_+(beta)} is where
J = 0.  Under the smooth-curve assumption set it is a graph beta = beta(alpha);
under the point/line assumption sets it is a point or a segment.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .charmap import CharCoord, PhysCoord, char_map, map_forward
from .errors import ConsistencyError, DomainError
from .initial_data import (
    InitialDataPair,
    f_indicator,
    sigma_beta,
    validate_assumptions,
)

FIRST_DERIV_TOL = 1e-7

KIND_OF_SET = {
    "H": "cusp",
    "A": "point-shape",
    "A-prime": "point-shape",
    "B-right": "line-shape-I",
    "B-left": "line-shape-I",
    "C": "line-shape-II",
}


@dataclass
class SigmaCurve:
    alpha: np.ndarray
    beta: np.ndarray  # NaN where alpha has no partner
    f: np.ndarray

    @property
    def present(self) -> np.ndarray:
        return np.isfinite(self.beta)

    def restricted(self) -> "SigmaCurve":
        m = self.present
        return SigmaCurve(self.alpha[m], self.beta[m], self.f[m])


@dataclass
class SingularityReport:
    kind: str
    blowup: PhysCoord
    witnesses: dict
    assumption_set: str
    line_extent: tuple[float, float] | None = None
    fold_points: list[float] = field(default_factory=list)
    cusp_points: list[float] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "assumption_set": self.assumption_set,
            "t0": self.blowup.t,
            "x0": self.blowup.x,
            "t_hat": None if self.line_extent is None else self.line_extent[1],
            "witnesses": self.witnesses,
            "fold_points": self.fold_points,
            "cusp_points": self.cusp_points,
        }


def build_sigma(data: InitialDataPair, alpha_range: tuple[float, float] | None = None, n: int = 401) -> SigmaCurve:
    """beta(alpha) by bisection of Lambda_+(beta) - Lambda_-(alpha) and f on a uniform alpha grid."""
    a, b = alpha_range or data.window
    alpha = np.linspace(a, b, n)
    beta = sigma_beta(data, alpha, data.window)
    with np.errstate(invalid="ignore"):
        f = np.where(np.isfinite(beta), f_indicator(data, alpha, np.nan_to_num(beta, nan=b)), np.nan)
    return SigmaCurve(alpha, beta, f)


def _beta_of(data: InitialDataPair, alpha: float) -> float:
    return float(sigma_beta(data, alpha, data.window)[0])


def upsilon_velocity(data: InitialDataPair, alpha, beta):
    """d/dalpha of Pi along Sigma: (f, Lambda_+(beta) f) / Lambda_+'(beta)."""
    f = f_indicator(data, alpha, beta)
    lp1 = data.lambda_plus(beta, 1)
    return f / lp1, data.lambda_plus(beta) * f / lp1


def _velocity_scale(data, alpha, beta) -> float:
    # size of the two terms whose difference is f, times the prefactor
    lp1 = float(data.lambda_plus(beta, 1))
    terms = abs(float(data.lambda_minus(alpha, 1) / data.gap(beta))) + abs(lp1 / float(data.gap(alpha)))
    return float(np.hypot(1.0, float(data.lambda_plus(beta)))) * terms / abs(lp1)


def classify_point(data: InitialDataPair, alpha: float, tol: float = FIRST_DERIV_TOL, h: float = 1e-4) -> str:
    """'fold', 'cusp', 'regular' (alpha not on Sigma) or 'degenerate'.

    'degenerate' covers flat stretches where both the first and second
    derivative of Pi along Sigma vanish, and Sigma points where Lambda_+' = 0
    so that Sigma is not a graph over alpha.
    """
    beta = _beta_of(data, alpha)
    if not np.isfinite(beta):
        return "regular"
    lp1 = float(data.lambda_plus(beta, 1))
    if abs(lp1) <= 1e-9:
        return "degenerate"
    scale = _velocity_scale(data, alpha, beta)
    band = tol * (1.0 + scale)
    v1 = np.hypot(*upsilon_velocity(data, alpha, beta))
    if v1 > band:
        return "fold"
    bp, bm = _beta_of(data, alpha + h), _beta_of(data, alpha - h)
    if not (np.isfinite(bp) and np.isfinite(bm)):
        return "degenerate"
    vp = np.array(upsilon_velocity(data, alpha + h, bp), dtype=float)
    vm = np.array(upsilon_velocity(data, alpha - h, bm), dtype=float)
    v2 = float(np.hypot(*((vp - vm) / (2.0 * h))))
    return "cusp" if v2 > band else "degenerate"


def f_prime_closed_form(data: InitialDataPair, alpha0: float, beta0: float) -> float:
    """f'(alpha0) from second derivatives at the witnesses.

    Valid only after translating so that Lambda_-(alpha0) = Lambda_+(beta0) = 0.
    """
    lm, lp = data.lambda_minus, data.lambda_plus
    lp_a = float(lp(alpha0))
    lm_b = float(lm(beta0))
    lp1_b = float(lp(beta0, 1))
    bracket = (lp1_b - float(lm(beta0, 1))) - (float(lp(alpha0, 1)) - float(lm(alpha0, 1)))
    num = float(lm(alpha0, 2)) * lp_a**2 - lm_b**2 * float(lp(beta0, 2)) + lp1_b * lm_b * bracket
    return num / (-lm_b * lp_a**2)


def blowup_point(data: InitialDataPair, witnesses: tuple[float, float], certify: bool = False, n: int = 401) -> PhysCoord:
    """(t0, x0) = Pi(alpha0, beta0).  With ``certify`` the minimum of t over Sigma is checked too."""
    alpha0, beta0 = witnesses
    q = map_forward(data, CharCoord(alpha0, beta0))
    if certify:
        sig = build_sigma(data, n=n).restricted()
        if len(sig.alpha):
            cm = char_map(data)
            t_sig, _ = cm.forward(sig.alpha, sig.beta)
            if t_sig.min() < q.t - 1e-10:
                i = int(np.argmin(t_sig))
                raise ConsistencyError(
                    f"t on Sigma dips below t0 = {q.t} at alpha = {sig.alpha[i]} (t = {t_sig[i]})"
                )
    return q


@dataclass
class EnvelopeCertificate:
    branch: str
    dt_dx_sign_ok: bool
    concave_ok: bool
    first_failure: float | None
    samples: int

    @property
    def ok(self) -> bool:
        return self.dt_dx_sign_ok and self.concave_ok


@dataclass
class Envelope:
    left: np.ndarray  # rows (alpha, beta, t, x, dt/dx, d2t/dx2)
    right: np.ndarray
    certificates: tuple[EnvelopeCertificate, EnvelopeCertificate]
    eps: float


def default_eps(data: InitialDataPair, alpha0: float, sigma: SigmaCurve | None = None) -> float:
    """Half the distance from alpha0 to the nearest other sign change of f or end of Sigma."""
    sig = (sigma or build_sigma(data, n=801)).restricted()
    a, f = sig.alpha, sig.f
    stops = [abs(a[0] - alpha0), abs(a[-1] - alpha0)]
    for i in np.nonzero(f[:-1] * f[1:] < 0)[0]:
        mid = 0.5 * (a[i] + a[i + 1])
        if abs(mid - alpha0) > 2 * (a[1] - a[0]):
            stops.append(abs(mid - alpha0))
    return 0.5 * min(stops)


def envelope(
    data: InitialDataPair,
    alpha0: float,
    eps: float | None = None,
    n: int = 200,
    sigma: SigmaCurve | None = None,
) -> Envelope:
    """Images of Sigma on (alpha0 - eps, alpha0) and (alpha0, alpha0 + eps) with slope/concavity checks.

    dt/dx = 1/Lambda_-(alpha) and d2t/dx2 = -Lambda_-'(alpha) Lambda_+'(beta) / (Lambda_-(alpha)^3 f(alpha))
    along Sigma.  The left branch must rise and the right branch fall, both concave.
    """
    if eps is None:
        eps = default_eps(data, alpha0, sigma)
    cm = char_map(data)
    frac = (np.arange(n) + 0.5) / n
    out, certs = [], []
    for name, alphas in (("left", alpha0 - eps * frac[::-1]), ("right", alpha0 + eps * frac)):
        betas = sigma_beta(data, alphas, data.window)
        if not np.all(np.isfinite(betas)):
            raise DomainError(f"Sigma does not extend over the {name} envelope branch; reduce eps")
        t, x = cm.forward(alphas, betas)
        lm = data.lambda_minus(alphas)
        f = f_indicator(data, alphas, betas)
        slope = 1.0 / lm
        curv = -data.lambda_minus(alphas, 1) * data.lambda_plus(betas, 1) / (lm**3 * f)
        want = slope > 0 if name == "left" else slope < 0
        bad = np.nonzero(~want | ~(curv < 0))[0]
        certs.append(
            EnvelopeCertificate(
                name, bool(want.all()), bool((curv < 0).all()), float(alphas[bad[0]]) if bad.size else None, n
            )
        )
        # the branch terminates at the cusp image
        tip = map_forward(data, CharCoord(alpha0, _beta_of(data, alpha0)))
        rows = np.column_stack([alphas, betas, t, x, slope, curv])
        tip_row = np.array([[alpha0, _beta_of(data, alpha0), tip.t, tip.x, np.nan, np.nan]])
        rows = np.vstack([rows, tip_row]) if name == "left" else np.vstack([tip_row, rows])
        out.append(rows)
    return Envelope(out[0], out[1], (certs[0], certs[1]), float(eps))


def detect_assumption_set(data: InitialDataPair):
    """First assumption set the data satisfy, with its report; (None, None) if none does."""
    for s in ("H", "A-prime", "B-right", "B-left", "C"):
        rep = validate_assumptions(data, s)
        if rep.satisfied:
            if s == "A-prime" and len(rep.witnesses.get("pairs", [])) == 1:
                return "A", validate_assumptions(data, "A")
            return s, rep
    return None, None


def _sigma_min_t(data: InitialDataPair, n: int = 801) -> tuple[float, float]:
    """Minimiser of t along the Sigma graph: grid scan plus golden-section refinement."""
    sig = build_sigma(data, n=n).restricted()
    if len(sig.alpha) == 0:
        raise DomainError("no blowup detected in window")
    cm = char_map(data)
    t, _ = cm.forward(sig.alpha, sig.beta)
    i = int(np.argmin(t))
    lo = sig.alpha[max(i - 1, 0)]
    hi = sig.alpha[min(i + 1, len(sig.alpha) - 1)]

    def t_on_sigma(al):
        be = sigma_beta(data, al, data.window)
        return float(cm.forward(np.atleast_1d(al), be)[0][0])

    # a flat t along Sigma (f identically zero) admits no bracket; the grid minimum stands
    if lo < sig.alpha[i] < hi and t[i] < min(t[max(i - 1, 0)], t[min(i + 1, len(t) - 1)]):
        res = minimize_scalar(t_on_sigma, bracket=(lo, sig.alpha[i], hi), method="golden", tol=1e-12)
        if res.fun <= t[i]:
            return float(res.x), float(res.fun)
    return float(sig.alpha[i]), float(t[i])


def lifespan(data: InitialDataPair) -> float:
    """Minimum of t over the singular set inside the window."""
    s, rep = detect_assumption_set(data)
    if s in ("A", "A-prime"):
        pairs = rep.witnesses.get("pairs") or [[rep.witnesses["alpha0"], rep.witnesses["beta0"]]]
        return min(map_forward(data, CharCoord(a, b)).t for a, b in pairs)
    if s in ("B-right", "B-left", "C"):
        # t decreases in alpha and increases in beta: the inner plateau ends win
        return map_forward(data, CharCoord(rep.witnesses["alpha0"], rep.witnesses["beta0"])).t
    return _sigma_min_t(data)[1]


def analyze(data: InitialDataPair, n_classify: int = 20) -> list[SingularityReport]:
    """One SingularityReport per singular pair found by the matching assumption set."""
    s, rep = detect_assumption_set(data)
    if s is None:
        raise DomainError("no assumption set satisfied: no blowup detected in window")
    w = rep.witnesses
    if s == "H":
        alpha0, beta0 = w["alpha0"], w["beta0"]
        q = blowup_point(data, (alpha0, beta0), certify=True)
        eps = default_eps(data, alpha0)
        folds = [float(a) for a in np.linspace(alpha0 - eps, alpha0 + eps, n_classify + 1) if abs(a - alpha0) > 1e-9]
        folds = [a for a in folds if classify_point(data, a) == "fold"]
        cusps = [alpha0] if classify_point(data, alpha0) == "cusp" else []
        return [SingularityReport("cusp", q, {"alpha0": alpha0, "beta0": beta0}, s, None, folds, cusps)]
    if s in ("A", "A-prime"):
        pairs = w.get("pairs") or [[w["alpha0"], w["beta0"]]]
        return [
            SingularityReport("point-shape", map_forward(data, CharCoord(a, b)), {"alpha0": a, "beta0": b}, s)
            for a, b in pairs
        ]
    alpha0, beta0 = w["alpha0"], w["beta0"]
    q = map_forward(data, CharCoord(alpha0, beta0))
    far_alpha = w.get("alpha_hat", alpha0)
    far_beta = w.get("beta_hat", beta0)
    t_hat = map_forward(data, CharCoord(far_alpha, far_beta)).t
    return [SingularityReport(KIND_OF_SET[s], q, dict(w), s, (q.t, t_hat))]
