"""The characteristic map Pi(alpha, beta) = (t, x), its inverse, and the flow state.

Naming follows the convention where the characteristic labelled by beta (the
"plus" family, beta fixed) travels with speed lambda_- and carries the
constant value lambda_+ = Lambda_+(beta); the one labelled by alpha (the
"minus" family, alpha fixed) travels with speed lambda_+ and carries
lambda_- = Lambda_-(alpha).

    t(alpha, beta) = int_alpha^beta dz / D(z)
    x(alpha, beta) = (alpha + beta + int_alpha^beta (Lambda_+ + Lambda_-)/D dz) / 2
    D = Lambda_+ - Lambda_-
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple

import numpy as np
from scipy.spatial import cKDTree

from .errors import ConsistencyError, DomainError, NearSingularError, NumericError
from .initial_data import InitialDataPair
from .quadrature import GL16_NODES, GL16_WEIGHTS, PrimitiveTable, gk15

INV_TOL = 1e-10
# below this |J| a unit roundoff in (t, x) moves (alpha, beta) by more than 1e-6
J_FLOOR = 1e-10
MAX_NEWTON = 60
SEED_N = 64


@dataclass(frozen=True)
class CharCoord:
    alpha: float
    beta: float

    def __post_init__(self):
        if self.alpha > self.beta:
            raise DomainError(f"characteristic coordinates need alpha <= beta, got {self.alpha}, {self.beta}")


@dataclass(frozen=True)
class PhysCoord:
    t: float
    x: float


class Partials(NamedTuple):
    t_alpha: float
    t_beta: float
    x_alpha: float
    x_beta: float
    J: float


@dataclass(frozen=True)
class FlowState:
    t: float
    x: float
    alpha: float
    beta: float
    rho: float
    u: float
    lambda_minus: float
    lambda_plus: float
    lambda_minus_x: float
    lambda_plus_x: float
    lambda_minus_t: float
    lambda_plus_t: float
    u_x: float
    u_t: float
    rho_x: float
    rho_t: float
    jacobian: float

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def map_forward(data: InitialDataPair, p: CharCoord, quad_tol: float = 1e-12) -> PhysCoord:
    """(t, x) = Pi(alpha, beta) by adaptive quadrature of both integrals."""
    a, b = p.alpha, p.beta
    if a == b:
        return PhysCoord(0.0, float(a))
    lm, lp = data.lambda_minus, data.lambda_plus
    t, _ = gk15(lambda z: 1.0 / (lp(z) - lm(z)), a, b, quad_tol)
    s, _ = gk15(lambda z: (lp(z) + lm(z)) / (lp(z) - lm(z)), a, b, quad_tol)
    return PhysCoord(t, 0.5 * (a + b + s))


def partials(data: InitialDataPair, alpha, beta) -> Partials:
    """Endpoint partials of Pi and J = t_alpha x_beta - t_beta x_alpha (vectorised)."""
    lm_a, lp_a = data.lambda_minus(alpha), data.lambda_plus(alpha)
    lm_b, lp_b = data.lambda_minus(beta), data.lambda_plus(beta)
    d_a, d_b = lp_a - lm_a, lp_b - lm_b
    t_a, t_b = -1.0 / d_a, 1.0 / d_b
    x_a, x_b = -lm_a / d_a, lp_b / d_b
    J = (lm_a - lp_b) / (d_a * d_b)
    return Partials(t_a, t_b, x_a, x_b, J)


def jacobian(data: InitialDataPair, p: CharCoord) -> Partials:
    return Partials(*(float(v) for v in partials(data, p.alpha, p.beta)))


class CharMap:
    """Vectorised Pi and its inverse for one data set (primitive tables + seed grid)."""

    def __init__(self, data: InitialDataPair, seed_n: int = SEED_N):
        self.data = data
        self.table = PrimitiveTable(data.lambda_minus, data.lambda_plus, data.window)
        a, b = data.window
        g = np.linspace(a, b, seed_n)
        A, B = np.meshgrid(g, g, indexing="ij")
        mask = A < B
        A, B = A[mask], B[mask]
        J = partials(data, A, B).J
        phys = J < 0
        self.seed_ab = np.column_stack([A[phys], B[phys]])
        t, x = self.forward(self.seed_ab[:, 0], self.seed_ab[:, 1])
        self._seed_tx = np.column_stack([t, x])
        self._tree = cKDTree(self._seed_tx)
        self._t0: float | None = None

    # -- forward -----------------------------------------------------------
    def forward(self, alpha, beta):
        Ta, Xa = self.table.eval(alpha)
        Tb, Xb = self.table.eval(beta)
        return Tb - Ta, 0.5 * (alpha + beta + Xb - Xa)

    # -- slices of constant t ---------------------------------------------
    def alpha_on_slice(self, t, beta):
        """alpha with t(alpha, beta) = t."""
        return self.table.inverse_T(self.table.eval_T(beta) - t)

    def beta_on_slice(self, t, alpha):
        return self.table.inverse_T(self.table.eval_T(alpha) + t)

    def slice_beta_range(self, t: float) -> tuple[float, float]:
        """Admissible beta on the slice t = const inside the window."""
        a, b = self.data.window
        return float(self.beta_on_slice(t, np.array(a))), b

    def _slice_invert(self, t: float, x: float) -> tuple[float, float]:
        # x is nondecreasing in beta along a slice that stays on the physical sheet
        lo, hi = self.slice_beta_range(t)
        def xb(beta):
            al = self.alpha_on_slice(t, np.array(beta))
            return float(self.forward(al, np.array(beta))[1]), float(al)
        if not (xb(lo)[0] <= x <= xb(hi)[0]):
            raise DomainError(f"point (t={t}, x={x}) is outside the image of the window")
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if not lo < mid < hi:
                break
            if xb(mid)[0] < x:
                lo = mid
            else:
                hi = mid
        beta = 0.5 * (lo + hi)
        return xb(beta)[1], beta

    # -- inverse -----------------------------------------------------------
    def seed(self, t, x):
        _, idx = self._tree.query(np.column_stack([np.atleast_1d(t), np.atleast_1d(x)]))
        return self.seed_ab[idx, 0], self.seed_ab[idx, 1]

    def newton(self, t, x, alpha, beta, tol: float = INV_TOL):
        """Damped Newton on Pi(alpha, beta) = (t, x), vectorised.

        Returns (alpha, beta, residual, |J|, converged).  A step is halved until the
        residual decreases and the iterate stays on the physical sheet J < 0.
        """
        t = np.atleast_1d(np.asarray(t, float))
        x = np.atleast_1d(np.asarray(x, float))
        al = np.atleast_1d(np.asarray(alpha, float)).copy()
        be = np.atleast_1d(np.asarray(beta, float)).copy()
        lo_w, hi_w = self.data.window
        tt, xx = self.forward(al, be)
        res = np.hypot(tt - t, xx - x)
        active = np.ones_like(t, dtype=bool)
        for _ in range(MAX_NEWTON):
            # keep polishing past tol until no further progress, then stop
            if not active.any():
                break
            p = partials(self.data, al, be)
            det = p.J
            rt, rx = tt - t, xx - x
            with np.errstate(divide="ignore", invalid="ignore"):
                da = (p.x_beta * rt - p.t_beta * rx) / det
                db = (-p.x_alpha * rt + p.t_alpha * rx) / det
            lam = np.ones_like(t)
            improved = np.zeros_like(active)
            for _h in range(30):
                na = np.clip(al - lam * da, lo_w, hi_w)
                nb = np.clip(be - lam * db, lo_w, hi_w)
                na = np.minimum(na, nb)
                ok_geom = np.isfinite(na) & np.isfinite(nb)
                na = np.where(ok_geom, na, al)
                nb = np.where(ok_geom, nb, be)
                nt, nx = self.forward(na, nb)
                nres = np.hypot(nt - t, nx - x)
                nJ = partials(self.data, na, nb).J
                good = ok_geom & (nres < res) & (nJ <= 0) & ~improved & active
                al = np.where(good, na, al)
                be = np.where(good, nb, be)
                tt = np.where(good, nt, tt)
                xx = np.where(good, nx, xx)
                res = np.where(good, nres, res)
                improved |= good
                if (improved | ~active).all():
                    break
                lam = lam * 0.5
            active &= improved & (res > 1e-3 * tol)
        Jabs = np.abs(partials(self.data, al, be).J)
        return al, be, res, Jabs, res <= tol

    def invert_many(self, t, x, tol: float = INV_TOL, seeds=None):
        t = np.atleast_1d(np.asarray(t, float))
        x = np.atleast_1d(np.asarray(x, float))
        if np.any(t < 0):
            raise DomainError("t must be nonnegative")
        sa, sb = self.seed(t, x) if seeds is None else seeds
        al, be, res, Jabs, conv = self.newton(t, x, sa, sb, tol)
        # retry from an exact slice solve where the grid seed was poor
        for i in np.nonzero(~conv & (Jabs >= J_FLOOR))[0]:
            try:
                a1, b1 = self._slice_invert(float(t[i]), float(x[i]))
            except DomainError:
                continue
            r = self.newton(t[i], x[i], a1, b1, tol)
            al[i], be[i], res[i], Jabs[i], conv[i] = r[0][0], r[1][0], r[2][0], r[3][0], r[4][0]
        return al, be, res, Jabs, conv

    def invert(self, q: PhysCoord, tol: float = INV_TOL, seed: CharCoord | None = None) -> CharCoord:
        seeds = None if seed is None else (np.array([seed.alpha]), np.array([seed.beta]))
        al, be, res, Jabs, conv = self.invert_many(q.t, q.x, tol, seeds)
        if Jabs[0] < J_FLOOR:
            raise NearSingularError(
                f"near-singular inversion at (t={q.t!r}, x={q.x!r})", CharCoord(float(al[0]), float(be[0])), float(Jabs[0])
            )
        if not conv[0]:
            raise NearSingularError(
                f"inversion did not converge at (t={q.t!r}, x={q.x!r}), residual {res[0]:.2e}",
                CharCoord(float(al[0]), float(be[0])),
                float(Jabs[0]),
            )
        return CharCoord(float(al[0]), float(be[0]))

    # -- lifespan used by the existence guard -------------------------------
    @property
    def t0(self) -> float:
        if self._t0 is None:
            from .singularity import lifespan  # local import: singularity builds on this module

            try:
                self._t0 = lifespan(self.data)
            except NumericError:
                self._t0 = math.inf
        return self._t0


@lru_cache(maxsize=32)
def char_map(data: InitialDataPair) -> CharMap:
    """Shared, read-only CharMap per data set."""
    return CharMap(data)


def invert(data: InitialDataPair, q: PhysCoord, tol: float = INV_TOL, seed: CharCoord | None = None) -> CharCoord:
    """(alpha, beta) on the physical sheet with |Pi(alpha, beta) - q| <= tol."""
    return char_map(data).invert(q, tol, seed)


class LocalChart:
    """Pi in offsets around a base pair: (da, db) -> (t - t_b, x - x_b).

    t~ = int_0^db 1/D(b0 + z) dz - int_0^da 1/D(a0 + z) dz
    x~ = int_0^db Lambda_+/D (b0 + z) dz - int_0^da Lambda_-/D (a0 + z) dz

    Curves are re-centred at a0 and b0 so nothing is evaluated at a0 + da.
    Only short intervals are integrated, so the offsets keep full relative
    precision far below the resolution of t0 and x0 themselves.
    """

    panel = 0.25

    def __init__(self, data: InitialDataPair, alpha0: float, beta0: float):
        self.data = data
        self.alpha0 = float(alpha0)
        self.beta0 = float(beta0)
        self.at_alpha = data.recentred(self.alpha0)
        self.at_beta = data.recentred(self.beta0)
        knots = np.array(data.knots())
        self.knots_alpha = knots - self.alpha0
        self.knots_beta = knots - self.beta0

    def _integrals(self, side: str, delta):
        delta = np.atleast_1d(np.asarray(delta, float))
        lm, lp = self.at_alpha if side == "alpha" else self.at_beta
        knots = self.knots_alpha if side == "alpha" else self.knots_beta
        carrier = lm if side == "alpha" else lp
        out_t = np.zeros_like(delta)
        out_x = np.zeros_like(delta)
        lo, hi = np.minimum(0.0, delta), np.maximum(0.0, delta)
        crosses = np.zeros(delta.shape, bool)
        for k in knots:
            crosses |= (lo < k) & (k < hi)
        smooth = ~crosses
        if smooth.any():
            d = delta[smooth]
            m = max(int(np.ceil(np.max(np.abs(d), initial=0.0) / self.panel)), 1)
            h = d / m
            for j in range(m):
                nodes = h[:, None] * (j + 0.5 * (GL16_NODES + 1.0))
                inv = 1.0 / (lp(nodes) - lm(nodes))
                out_t[smooth] += 0.5 * h * (inv @ GL16_WEIGHTS)
                out_x[smooth] += 0.5 * h * ((carrier(nodes) * inv) @ GL16_WEIGHTS)
        for i in np.nonzero(crosses)[0]:
            e = float(delta[i])
            inner = sorted(k for k in knots if min(0.0, e) < k < max(0.0, e))
            cuts = [0.0] + (inner if e > 0 else inner[::-1]) + [e]
            for u, v in zip(cuts[:-1], cuts[1:]):
                out_t[i] += gk15(lambda z: 1.0 / (lp(z) - lm(z)), u, v, 1e-15)[0]
                out_x[i] += gk15(lambda z: carrier(z) / (lp(z) - lm(z)), u, v, 1e-15)[0]
        return out_t, out_x

    def forward(self, da, db, with_floor: bool = False):
        ta, xa = self._integrals("alpha", da)
        tb, xb = self._integrals("beta", db)
        if with_floor:
            # roundoff level of each difference
            return tb - ta, xb - xa, np.abs(ta) + np.abs(tb), np.abs(xa) + np.abs(xb)
        return tb - ta, xb - xa

    def partials(self, da, db) -> Partials:
        lm_a, lp_a = (c(da) for c in self.at_alpha)
        lm_b, lp_b = (c(db) for c in self.at_beta)
        d_a, d_b = lp_a - lm_a, lp_b - lm_b
        return Partials(-1.0 / d_a, 1.0 / d_b, -lm_a / d_a, lp_b / d_b, (lm_a - lp_b) / (d_a * d_b))

    def beta_for_time(self, da: float, tt: float, guess: float, iters: int = 60) -> float:
        """db with t~(da, db) = tt at fixed da; dt~/d(db) = 1/D(beta) > 0."""
        db = float(guess)
        for _ in range(iters):
            t1, _x = self.forward(da, db)
            lm_b, lp_b = (c(db) for c in self.at_beta)
            step = (float(t1[0]) - tt) * float(lp_b - lm_b)
            db -= step
            if abs(step) <= 1e-16 * max(abs(db), 1e-300):
                break
        return db

    def invert(self, tt, xt, seed, tol_rel: float = 1e-11, max_iter: int = MAX_NEWTON):
        """Damped Newton for (da, db) with forward(da, db) = (tt, xt), one point at a time.

        Iterates to roundoff.  Each residual component is accepted when it is
        within ``tol_rel`` of the magnitude of the two integrals it is the
        difference of; otherwise NearSingularError.
        """
        da, db = float(seed[0]), float(seed[1])
        if tt == 0.0 and xt == 0.0:
            return 0.0, 0.0

        def resid(a, b):
            t1, x1, ft, fx = self.forward(a, b, with_floor=True)
            return float(t1[0] - tt), float(x1[0] - xt), float(ft[0]), float(fx[0])

        def norm(rt, rx, ft, fx):
            return np.hypot(rt / (ft + abs(tt) + 1e-300), rx / (fx + abs(xt) + 1e-300))

        rt, rx, ft, fx = resid(da, db)
        r = norm(rt, rx, ft, fx)
        for _ in range(max_iter):
            if r == 0.0:
                break
            p = self.partials(da, db)
            if p.J == 0.0:
                break
            sa = (p.x_beta * rt - p.t_beta * rx) / p.J
            sb = (-p.x_alpha * rt + p.t_alpha * rx) / p.J
            lam = 1.0
            for _h in range(40):
                na, nb = da - lam * sa, db - lam * sb
                if np.isfinite(na) and np.isfinite(nb) and self.alpha0 + na <= self.beta0 + nb:
                    nJ = float(self.partials(na, nb).J)
                    if nJ <= 0:
                        cand = resid(na, nb)
                        nr = norm(*cand)
                        if nr < r:
                            break
                lam *= 0.5
            else:
                break
            small = abs(na - da) + abs(nb - db) <= 1e-16 * (abs(da) + abs(db))
            da, db = na, nb
            (rt, rx, ft, fx), r = cand, nr
            if small:
                break
        if not r <= tol_rel:
            J = abs(float(self.partials(da, db).J))
            raise NearSingularError(
                f"local inversion stalled at offsets ({tt!r}, {xt!r}), scaled residual {r:.2e}",
                CharCoord(self.alpha0 + da, self.beta0 + db),
                J,
            )
        return da, db

    def state(self, da, db) -> dict:
        """Flow quantities at offsets (da, db); Delta = Lambda_+(beta) - Lambda_-(alpha) without cancellation."""
        da = np.asarray(da, float)
        db = np.asarray(db, float)
        lm_a, lp_a = self.at_alpha
        lm_b, lp_b = self.at_beta
        return _assemble_state(
            self.data.mu,
            lm_a(da),
            lp_b(db),
            lm_a(da, 1),
            lp_b(db, 1),
            lp_a(da) - lm_a(da),
            lp_b(db) - lm_b(db),
            self.alpha0 + da,
            self.beta0 + db,
        )


def state_from_chars(data: InitialDataPair, alpha, beta) -> dict:
    """Flow quantities at characteristic coordinates (vectorised dict of arrays)."""
    return _assemble_state(
        data.mu,
        data.lambda_minus(alpha),
        data.lambda_plus(beta),
        data.lambda_minus(alpha, 1),
        data.lambda_plus(beta, 1),
        data.gap(alpha),
        data.gap(beta),
        alpha,
        beta,
    )


def _assemble_state(mu, lm, lp, lm1, lp1, d_a, d_b, alpha, beta) -> dict:
    delta = lp - lm
    if np.any(delta <= 0):
        raise ConsistencyError("Lambda_+(beta) - Lambda_-(alpha) <= 0 inside the existence domain")
    lm_x = lm1 * d_a / delta
    lp_x = lp1 * d_b / delta
    lm_t = -lp * lm_x
    lp_t = -lm * lp_x
    return dict(
        alpha=alpha,
        beta=beta,
        rho=2.0 * mu / delta,
        u=0.5 * (lp + lm),
        lambda_minus=lm,
        lambda_plus=lp,
        lambda_minus_x=lm_x,
        lambda_plus_x=lp_x,
        lambda_minus_t=lm_t,
        lambda_plus_t=lp_t,
        u_x=0.5 * (lp_x + lm_x),
        u_t=0.5 * (lp_t + lm_t),
        rho_x=-2.0 * mu * (lp_x - lm_x) / delta**2,
        rho_t=-2.0 * mu * (lp_t - lm_t) / delta**2,
        jacobian=(lm - lp) / (d_a * d_b),
    )


def evaluate_state(
    data: InitialDataPair,
    q: PhysCoord,
    post_blowup: bool = False,
    t0: float | None = None,
    seed: CharCoord | None = None,
    tol: float = INV_TOL,
) -> FlowState:
    """Density, velocity, invariants and all first partials at q.

    Points beyond the life span are refused unless ``post_blowup`` is set
    (off a singular line the solution can stay classical).
    """
    cm = char_map(data)
    if not post_blowup:
        limit = cm.t0 if t0 is None else t0
        if q.t > limit + 1e-12:
            raise DomainError(f"t = {q.t} is beyond the life span t0 = {limit}; pass post_blowup=True to override")
    p = cm.invert(q, tol, seed)
    s = state_from_chars(data, p.alpha, p.beta)
    return FlowState(t=q.t, x=q.x, **{k: float(v) for k, v in s.items()})


def trace_characteristic(data: InitialDataPair, family: str, start: float, t_grid) -> np.ndarray:
    """Characteristic through (0, start) sampled at ``t_grid``; rows are (t, x, alpha, beta).

    ``minus-family``: alpha = start fixed, moves with lambda_+, carries lambda_- = Lambda_-(start).
    ``plus-family``: beta = start fixed, moves with lambda_-, carries lambda_+ = Lambda_+(start).
    """
    cm = char_map(data)
    t_grid = np.asarray(t_grid, dtype=float)
    if np.any(t_grid < 0):
        raise DomainError("t-grid must be nonnegative")
    tab = cm.table
    T_s = tab.eval_T(np.array(start))
    if family == "minus-family":
        target = T_s + t_grid
        if np.any(target > tab.T[-1]):
            raise DomainError(f"t beyond the coordinate line alpha = {start} inside the window")
        beta = tab.inverse_T(target)
        alpha = np.full_like(beta, start)
    elif family == "plus-family":
        target = T_s - t_grid
        if np.any(target < tab.T[0]):
            raise DomainError(f"t beyond the coordinate line beta = {start} inside the window")
        alpha = tab.inverse_T(target)
        beta = np.full_like(alpha, start)
    else:
        raise DomainError(f"family must be 'plus-family' or 'minus-family', got {family!r}")
    t, x = cm.forward(alpha, beta)
    return np.column_stack([t, x, alpha, beta])
