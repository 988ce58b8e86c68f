"""Quadrature primitives.

``gk15`` is a global adaptive Gauss-Kronrod (7, 15) rule with an absolute
tolerance.  ``PrimitiveTable`` caches the antiderivatives

    T(z) = int_{z_ref}^{z} dz / D,            D = Lambda_+ - Lambda_-
    X(z) = int_{z_ref}^{z} (Lambda_+ + Lambda_-) / D dz

on a fixed breakpoint mesh so that the characteristic map can be evaluated
for whole arrays of (alpha, beta) at once.
"""

from __future__ import annotations

import heapq
from typing import Callable

import numpy as np

from .errors import DomainError, QuadratureError

_XGK = np.array(
    [
        0.991455371120812639206854697526329,
        0.949107912342758524526189684047851,
        0.864864423359769072789712788640926,
        0.741531185599394439863864773280788,
        0.586087235467691130294144845693013,
        0.405845151377397166906606412076961,
        0.207784955007898467600689403773245,
        0.000000000000000000000000000000000,
    ]
)
_WGK = np.array(
    [
        0.022935322010529224963732008058970,
        0.063092092629978553290700663189204,
        0.104790010322250183839876322541518,
        0.140653259715525918745189590510238,
        0.169004726639267902826583426598550,
        0.190350578064785409913256402421014,
        0.204432940075298892414161999234649,
        0.209482141084727828012999174891714,
    ]
)
_WG = np.array(
    [
        0.129484966168869693270611432679082,
        0.279705391489276667901467771423780,
        0.381830050505118944950369775488975,
        0.417959183673469387755102040816327,
    ]
)
# full symmetric node set: -x0..-x6, 0, x6..x0
_NODES = np.concatenate([-_XGK[:-1], [0.0], _XGK[-2::-1]])
_KW = np.concatenate([_WGK[:-1], [_WGK[-1]], _WGK[-2::-1]])
_GW = np.zeros(15)
_GW[[1, 3, 5]] = _WG[:3]
_GW[7] = _WG[3]
_GW[[13, 11, 9]] = _WG[:3]

GL16_NODES, GL16_WEIGHTS = np.polynomial.legendre.leggauss(16)

_EPS = np.finfo(float).eps


def _gk_panel(f: Callable, a: float, b: float) -> tuple[float, float]:
    c, h = 0.5 * (a + b), 0.5 * (b - a)
    y = np.asarray(f(c + h * _NODES), dtype=float)
    k = h * float(_KW @ y)
    g = h * float(_GW @ y)
    return k, abs(k - g)


def gk15(f: Callable, a: float, b: float, tol: float = 1e-12, max_intervals: int = 2000) -> tuple[float, float]:
    """Integrate vectorised ``f`` over [a, b] to absolute tolerance ``tol``.

    Returns (value, error estimate).  The error estimate is |K15 - G7| summed
    over panels, which overestimates the Kronrod error for smooth integrands.
    Raises QuadratureError with the worst sub-interval on failure.
    """
    if a == b:
        return 0.0, 0.0
    sign = 1.0
    if b < a:
        a, b, sign = b, a, -1.0
    k, e = _gk_panel(f, a, b)
    if not np.isfinite(k):
        raise QuadratureError("non-finite integrand", (a, b))
    heap = [(-e, a, b, k)]
    total, err = k, e
    while True:
        floor = 50.0 * _EPS * sum(abs(item[3]) for item in heap)
        if err <= max(tol, floor):
            return sign * total, err
        if len(heap) >= max_intervals:
            worst = heap[0]
            raise QuadratureError(f"no convergence after {max_intervals} panels (err {err:.2e})", (worst[1], worst[2]))
        neg_e, lo, hi, kv = heapq.heappop(heap)
        mid = 0.5 * (lo + hi)
        if not lo < mid < hi:
            raise QuadratureError("panel width below resolution", (lo, hi))
        k1, e1 = _gk_panel(f, lo, mid)
        k2, e2 = _gk_panel(f, mid, hi)
        if not (np.isfinite(k1) and np.isfinite(k2)):
            raise QuadratureError("non-finite integrand", (lo, hi))
        total += k1 + k2 - kv
        err += e1 + e2 + neg_e
        heapq.heappush(heap, (-e1, lo, mid, k1))
        heapq.heappush(heap, (-e2, mid, hi, k2))


def gauss_legendre(n: int, a: float, b: float) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights of the n-point Gauss-Legendre rule on [a, b]."""
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (b - a) * x + 0.5 * (a + b), 0.5 * (b - a) * w


class PrimitiveTable:
    """Antiderivatives T and X of the characteristic integrands on a mesh.

    Cumulative values at breakpoints come from ``gk15``; inside a cell a
    16-point Gauss-Legendre rule is applied to [z_i, z].  Breakpoints include
    every curve knot so no cell straddles a point of reduced smoothness.
    """

    def __init__(self, lambda_minus, lambda_plus, window: tuple[float, float], h: float = 0.02, tol: float = 1e-13):
        a, b = window
        self.lm, self.lp = lambda_minus, lambda_plus
        self.window = (float(a), float(b))
        n = max(int(np.ceil((b - a) / h)), 1)
        pts = set(np.linspace(a, b, n + 1).tolist())
        knots = set(getattr(lambda_minus, "knots", lambda: ())()) | set(getattr(lambda_plus, "knots", lambda: ())())
        pts |= {k for k in knots if a < k < b}
        z = np.array(sorted(pts))
        # drop slivers created by knots sitting next to mesh points
        keep = np.concatenate([[True], np.diff(z) > 1e-9 * (b - a)])
        keep[-1] = True
        z = z[keep]
        self.z = z
        self.T = np.zeros_like(z)
        self.X = np.zeros_like(z)
        for i in range(len(z) - 1):
            dt, _ = gk15(self.inv_gap, z[i], z[i + 1], tol)
            dx, _ = gk15(self.drift, z[i], z[i + 1], tol)
            self.T[i + 1] = self.T[i] + dt
            self.X[i + 1] = self.X[i] + dx

    def inv_gap(self, z):
        return 1.0 / (self.lp(z) - self.lm(z))

    def drift(self, z):
        lp, lm = self.lp(z), self.lm(z)
        return (lp + lm) / (lp - lm)

    def _cell(self, z):
        a, b = self.window
        if np.any((z < a - 1e-12) | (z > b + 1e-12)) or np.any(~np.isfinite(z)):
            raise DomainError(f"characteristic parameter outside the tabulated window [{a}, {b}]")
        return np.clip(np.searchsorted(self.z, z, side="right") - 1, 0, len(self.z) - 2)

    def eval(self, z):
        """(T(z), X(z)) for an array of z in the window."""
        z = np.asarray(z, dtype=float)
        i = self._cell(z)
        z0 = self.z[i]
        half = 0.5 * (z - z0)
        nodes = z0[..., None] + half[..., None] * (GL16_NODES + 1.0)
        lp, lm = self.lp(nodes), self.lm(nodes)
        inv = 1.0 / (lp - lm)
        T = self.T[i] + half * ((inv) @ GL16_WEIGHTS)
        X = self.X[i] + half * (((lp + lm) * inv) @ GL16_WEIGHTS)
        return T, X

    def eval_T(self, z):
        return self.eval(z)[0]

    def inverse_T(self, y, iters: int = 40):
        """z with T(z) = y.  T is strictly increasing, so this is a bracketed Newton."""
        y = np.asarray(y, dtype=float)
        slack = 64 * _EPS * max(abs(self.T[0]), abs(self.T[-1]), 1.0)
        if np.any((y < self.T[0] - slack) | (y > self.T[-1] + slack)):
            raise DomainError("time level leaves the tabulated window")
        y = np.clip(y, self.T[0], self.T[-1])
        i = np.clip(np.searchsorted(self.T, y, side="right") - 1, 0, len(self.z) - 2)
        lo, hi = self.z[i].copy(), self.z[i + 1].copy()
        frac = (y - self.T[i]) / (self.T[i + 1] - self.T[i])
        z = lo + frac * (hi - lo)
        for _ in range(iters):
            r = self.eval_T(z) - y
            lo = np.where(r < 0, z, lo)
            hi = np.where(r > 0, z, hi)
            step = r * (self.lp(z) - self.lm(z))
            z_new = z - step
            bad = (z_new <= lo) | (z_new >= hi)
            z_new = np.where(bad, 0.5 * (lo + hi), z_new)
            if np.all(np.abs(z_new - z) <= 4 * _EPS * (1.0 + np.abs(z))):
                z = z_new
                break
            z = z_new
        return z
