"""Adaptive 1-D and nested k-fold quadrature shared by the spacing modules.

Error estimation uses embedded Gauss-Legendre pairs (order m vs 2m on each
panel).  Semi-infinite ranges are handled by explicit truncation at the point
where the integrand has decayed below a Gaussian-tail threshold; every
integrand in this package carries an explicit exp(-c*(x+s)^2) factor, so the
truncation error is controlled directly.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np


class QuadratureError(RuntimeError):
    """Raised when the requested tolerance was not reached.

    Carries the best available estimate and its error bound.
    """

    def __init__(self, message, value=None, error=None):
        super().__init__(message)
        self.value = value
        self.error = error


@dataclass(frozen=True)
class QuadratureSpec:
    abs_tol: float = 1e-10
    rel_tol: float = 1e-10
    max_subdiv: int = 4000
    tail_threshold: float = 1e-18

    def __post_init__(self):
        if self.abs_tol <= 0 or self.rel_tol <= 0:
            raise ValueError("tolerances must be positive")
        if self.max_subdiv < 1:
            raise ValueError("max_subdiv must be >= 1")


DEFAULT_SPEC = QuadratureSpec()


@lru_cache(maxsize=64)
def _gl_nodes(order):
    x, w = np.polynomial.legendre.leggauss(order)
    return x, w


def gauss_legendre(order, a, b):
    """Nodes and weights of the order-point Gauss-Legendre rule on [a, b]."""
    x, w = _gl_nodes(order)
    half = 0.5 * (b - a)
    return 0.5 * (a + b) + half * x, half * w


def _eval(f, x, vectorized):
    if vectorized:
        return np.asarray(f(x), dtype=float)
    return np.array([f(float(t)) for t in x], dtype=float)


def _panel(f, a, b, order, vectorized):
    """Fine estimate and a conservative error from an embedded pair.

    The embedded difference underestimates once both rules are exact to
    machine precision, so a roundoff floor proportional to the magnitude is
    added.
    """
    x1, w1 = gauss_legendre(order, a, b)
    x2, w2 = gauss_legendre(2 * order, a, b)
    c = float(np.dot(w1, _eval(f, x1, vectorized)))
    fy = _eval(f, x2, vectorized)
    fine = float(np.dot(w2, fy))
    floor = 2e-14 * (b - a) * float(np.max(np.abs(fy), initial=0.0))
    return fine, abs(fine - c) + floor


def truncate_upper(f, a, spec=DEFAULT_SPEC, vectorized=False, start=None):
    """Upper cutoff for an integrand decaying to 0 at +inf.

    Probes geometrically until |f| stays below tail_threshold relative to the
    largest magnitude seen.
    """
    b = start if start is not None else max(abs(a) + 1.0, 1.0)
    peak = max(float(np.max(np.abs(_eval(f, np.linspace(a, b, 9)[1:], vectorized)))), 1e-300)
    quiet = 0
    for _ in range(200):
        v = abs(float(_eval(f, np.array([b]), vectorized)[0]))
        peak = max(peak, v)
        if v <= spec.tail_threshold * peak:
            quiet += 1
            if quiet >= 2:
                return b
        else:
            quiet = 0
        b *= 1.25
    raise QuadratureError("could not locate a Gaussian-decay cutoff")


def integrate_1d(f, a, b, spec=DEFAULT_SPEC, vectorized=False, order=15):
    """Adaptive integral of f over (a, b); b may be numpy.inf.

    Returns (value, error_estimate).  Bisects the panel with the largest
    embedded-pair error until the summed estimate is below
    max(abs_tol, rel_tol*|value|); ties are broken toward the leftmost panel,
    and the final sum runs left to right, so results are reproducible
    bit-for-bit for identical inputs.
    """
    a = float(a)
    if np.isinf(b):
        b = truncate_upper(f, a, spec, vectorized)
    b = float(b)
    if b <= a:
        return 0.0, 0.0

    val, err = _panel(f, a, b, order, vectorized)
    panels = [(a, b, val, err)]
    for _ in range(spec.max_subdiv):
        total = sum(p[2] for p in panels)
        total_err = sum(p[3] for p in panels)
        if total_err <= max(spec.abs_tol, spec.rel_tol * abs(total)):
            panels.sort(key=lambda p: p[0])
            return sum(p[2] for p in panels), sum(p[3] for p in panels)
        worst = max(range(len(panels)), key=lambda i: (panels[i][3], -panels[i][0]))
        lo, hi, _, _ = panels.pop(worst)
        mid = 0.5 * (lo + hi)
        vl, el = _panel(f, lo, mid, order, vectorized)
        vr, er = _panel(f, mid, hi, order, vectorized)
        panels.append((lo, mid, vl, el))
        panels.append((mid, hi, vr, er))
    panels.sort(key=lambda p: p[0])
    total = sum(p[2] for p in panels)
    total_err = sum(p[3] for p in panels)
    raise QuadratureError(
        f"no convergence after {spec.max_subdiv} subdivisions "
        f"(estimate {total:.6e}, error {total_err:.2e})",
        value=total,
        error=total_err,
    )


def _inner_grid(chi, ndim, order, ordered):
    """Quadrature points/weights over [0, chi]^ndim (or its ordered simplex).

    Returns (points, weights) with points of shape (npts, ndim).  In ordered
    mode the grid covers 0 <= t_1 <= ... <= t_ndim <= chi and the weights are
    multiplied by ndim! so that, for permutation-symmetric integrands, both
    modes integrate the full cube.
    """
    if ndim == 0:
        return np.zeros((1, 0)), np.ones(1)
    x, w = _gl_nodes(order)
    if not ordered:
        half = 0.5 * chi
        nodes = half + half * x
        wts = half * w
        grids = np.meshgrid(*([nodes] * ndim), indexing="ij")
        pts = np.stack([g.ravel() for g in grids], axis=1)
        weight = np.ones(pts.shape[0])
        for g in np.meshgrid(*([wts] * ndim), indexing="ij"):
            weight *= g.ravel()
        return pts, weight
    # ordered simplex: map each level onto [previous, chi]
    pts = np.zeros((1, 0))
    weight = np.ones(1)
    lower = np.zeros(1)
    for _ in range(ndim):
        half = 0.5 * (chi - lower)
        nodes = (lower + half)[:, None] + half[:, None] * x[None, :]
        wts = half[:, None] * w[None, :]
        npts, m = nodes.shape
        pts = np.repeat(pts, m, axis=0)
        pts = np.concatenate([pts, nodes.reshape(-1, 1)], axis=1)
        weight = (weight[:, None] * wts).ravel()
        lower = nodes.ravel()
    from math import factorial

    return pts, weight * factorial(ndim)


def integrate_nested(f, k, spec=DEFAULT_SPEC, symmetric=False, inner_order=64,
                     outer_cutoff=None, outer_order=15):
    """Integral of f over {0 <= t_1, ..., t_{k-1} <= chi < infinity}.

    f maps an (npts, k) array of points, columns (t_1, ..., t_{k-1}, chi),
    to npts values and must be vectorized.  The outer chi integral is
    adaptive; the inner box is a fixed-order Gauss-Legendre product, refined
    (order doubled, twice) if the outer integral stalls.  With
    symmetric=True, f is assumed invariant under permutations of the first
    k-1 columns and only the ordered region is sampled.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    ndim = k - 1

    def outer_integrand(chis, order):
        out = np.empty(len(chis))
        for i, chi in enumerate(chis):
            pts, wts = _inner_grid(chi, ndim, order, symmetric)
            full = np.concatenate([pts, np.full((pts.shape[0], 1), chi)], axis=1)
            out[i] = float(np.dot(wts, f(full)))
        return out

    order = inner_order
    for attempt in range(3):
        g = lambda c: outer_integrand(np.atleast_1d(c), order)
        try:
            if outer_cutoff is None:
                hi = truncate_upper(g, 0.0, spec, vectorized=True)
            else:
                hi = float(outer_cutoff)
            return integrate_1d(g, 0.0, hi, spec, vectorized=True, order=outer_order)
        except QuadratureError as exc:
            last = exc
            order *= 2
    raise last
