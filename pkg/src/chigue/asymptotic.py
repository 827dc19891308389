"""Hard-edge spacing distributions in the microscopic large-n limit.

The k-th spacing density is a k-fold integral over a determinant of size
nu + nf + k whose entries are modified Bessel functions and the limiting
kernel family.  Rescaled masses mu_f = sqrt(n) m_f may be of order 10^3 in
quenched-limit studies, where I_nu overflows; every determinant entry is
therefore assembled as (log-magnitude, sign) and the rows are rescaled
before LU factorisation.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from math import factorial

import numpy as np
from scipy import special as _sp

from ._linalg import det_rowscaled, slogdet_logentries, slogdet_rowscaled
from .kernels import EPS_LIMITING
from .quadrature import QuadratureSpec, gauss_legendre, integrate_1d, integrate_nested
from .refstats import TabulatedDistribution

TAIL = 1e-18
_LOG_TAIL = -np.log(TAIL)


def sigma_tilde_max(k):
    """Truncation point of the shifted variable sigma + chi.

    The Gaussian exp(-sigma_tilde^2) competes with up to exp(4k sigma_tilde)
    of kernel growth (k rows of limiting-kernel entries, each of order
    exp(2(x+y)) with x, y <= sigma_tilde), plus slowly varying polynomial
    factors; the margin of 81 in the root keeps the discarded tail below
    ~1e-16 relative for k <= 3.
    """
    return 2.0 * k + np.sqrt(4.0 * k * k + 81.0)

# beyond these the determinant evaluation turns unstable; larger settings
# belong to the Monte-Carlo sampler
MAX_K = 3
MAX_NU = 2
MAX_NF = 2

DEFAULT_SPEC = QuadratureSpec(abs_tol=1e-12, rel_tol=1e-8)


@dataclass(frozen=True)
class AsymptoticParams:
    """Limit spacing selector: k-th spacing, zero modes nu, flavours with
    rescaled masses mu."""

    k: int
    nu: int = 0
    nf: int = 0
    mu: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "mu", tuple(float(m) for m in self.mu))
        if not (1 <= self.k <= MAX_K):
            raise ValueError(f"k must be in 1..{MAX_K}")
        if not (0 <= self.nu <= MAX_NU):
            raise ValueError(f"nu must be in 0..{MAX_NU}")
        if not (0 <= self.nf <= MAX_NF):
            raise ValueError(f"nf must be in 0..{MAX_NF}")
        if len(self.mu) != self.nf:
            raise ValueError("need exactly nf rescaled masses")
        if any(m <= 0 for m in self.mu):
            raise ValueError("rescaled masses must be positive")
        if len(set(self.mu)) != len(self.mu):
            raise ValueError("rescaled masses must be distinct")


def _k0_core_pairs(y):
    """Scaled limiting kernel over all argument pairs of y (npts, m).

    Returns core with K_0(y_i, y_j) = core[:, i, j] * exp(2(y_i + y_j)).
    The exact diagonal uses the equal-argument formula; nearly degenerate
    off-diagonal pairs (possible on product quadrature grids) are patched
    with the midpoint diagonal value.
    """
    iv1 = _sp.ive(1, 2 * y)
    iv2 = _sp.ive(2, 2 * y)
    iv3 = _sp.ive(3, 2 * y)
    X = y[:, :, None]
    Y = y[:, None, :]
    t1 = 2 * Y * iv1[:, None, :] * iv2[:, :, None]
    t2 = 2 * X * iv1[:, :, None] * iv2[:, None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        core = (t1 - t2) / ((X * Y) ** 2 * (Y**2 - X**2))
    d = 2.0 / y**4 * (iv2**2 - iv3 * iv1)
    idx = np.arange(y.shape[1])
    core[:, idx, idx] = d
    near = np.abs(Y**2 - X**2) <= EPS_LIMITING * np.maximum(X**2, Y**2)
    near[:, idx, idx] = False
    if np.any(near):
        pi, ri, ci = np.nonzero(near)
        mid = 0.5 * (y[pi, ri] + y[pi, ci])
        core[pi, ri, ci] = 2.0 / mid**4 * (
            _sp.ive(2, 2 * mid) ** 2 - _sp.ive(3, 2 * mid) * _sp.ive(1, 2 * mid))
    return core


def _k0_log_pairs(y):
    """(logmag, sign) form of the limiting-kernel pair matrix."""
    core = _k0_core_pairs(y)
    X = y[:, :, None]
    Y = y[:, None, :]
    with np.errstate(divide="ignore"):
        logmag = np.log(np.abs(core)) + 2.0 * (X + Y)
    return logmag, np.sign(core)


_KAPPA_NODES = None


def _kappa_nodes():
    global _KAPPA_NODES
    if _KAPPA_NODES is None:
        n1, w1 = gauss_legendre(32, 0.0, 0.8)
        n2, w2 = gauss_legendre(32, 0.8, 1.0)
        _KAPPA_NODES = (np.concatenate([n1, n2]), np.concatenate([w1, w2]))
    return _KAPPA_NODES


def _kappa_log_batch(a_minus_1, x, y):
    """(logmag, sign) of the limiting kernel of derivative order a-1 >= 1,
    via its integral representation, scaled so huge arguments stay finite."""
    a = a_minus_1 + 1
    t, w = _kappa_nodes()
    xt = 2.0 * x[:, None] * t[None, :]
    yt = 2.0 * y[:, None] * t[None, :]
    expo = 2.0 * (x + y)[:, None] * (t[None, :] - 1.0)
    integ = t[None, :] ** a * _sp.ive(3 - a, xt) * _sp.ive(2, yt) * np.exp(expo)
    g = integ @ w
    with np.errstate(divide="ignore"):
        logmag = np.log(4.0) - (1 + a) * np.log(x) - 2 * np.log(y) \
            + np.log(np.abs(g)) + 2.0 * (x + y)
    return logmag, np.sign(g)


@lru_cache(maxsize=64)
def _mass_norm_logdet(nu, mu):
    """(sign, log|det[mu_a^{nu+b-1} I_{nu+b-1}(2 mu_a)]|); empty det = 1."""
    nf = len(mu)
    if nf == 0:
        return 1.0, 0.0
    m = np.asarray(mu, dtype=float)
    logmag = np.empty((nf, nf))
    sign = np.empty((nf, nf))
    for b in range(1, nf + 1):
        order = nu + b - 1
        scaled = _sp.ive(order, 2 * m)
        logmag[:, b - 1] = order * np.log(m) + np.log(np.abs(scaled)) + 2 * m
        sign[:, b - 1] = np.sign(scaled)
    dsign, dlog = slogdet_logentries(logmag[None], sign[None])
    return float(dsign[0]), float(dlog[0])


def _shifted(params, pts, sigma):
    """sigma_tilde, mu_tilde (npts, nf), and the kernel-argument list
    [lambda_tilde_1.., chi_tilde] (npts, k) for points (npts, k)."""
    chi = pts[:, -1]
    st = chi + sigma
    mt = np.sqrt(st[:, None] ** 2 + np.asarray(params.mu)[None, :] ** 2) \
        if params.nf else np.zeros((len(pts), 0))
    lt = np.sqrt(np.maximum(st[:, None] ** 2 - pts**2, 0.0))
    return st, mt, lt


def _integrand_general(params, sigma):
    nu, nf, k = params.nu, params.nf, params.k
    ncols = nf + nu
    m = ncols + k
    nsign, nlog = _mass_norm_logdet(nu, params.mu)
    base = np.log(2.0) - np.log(float(factorial(k - 1)))

    def f(pts):
        npts = pts.shape[0]
        st, mt, lt = _shifted(params, pts, sigma)
        logmag = np.empty((npts, m, m))
        sign = np.empty((npts, m, m))
        # variables owning rows nu..m-1 and kernel columns: mu_b then
        # lambda_1..lambda_{k-1}, chi
        vrows = np.concatenate([mt, lt], axis=1)
        klog, ksign = _k0_log_pairs(vrows)
        row = 0
        for a in range(1, nu + 1):
            for d in range(1, ncols + 1):
                order = d - a + 2
                scaled = _sp.ive(order, 2 * st)
                logmag[:, row, d - 1] = (d - a - 2) * np.log(st) \
                    + np.log(np.abs(scaled)) + 2 * st
                sign[:, row, d - 1] = np.sign(scaled)
            for e in range(k):
                if a == 1:
                    lm, sg = _kappa_pair_closed(st, lt[:, e])
                else:
                    lm, sg = _kappa_log_batch(a - 1, st, lt[:, e])
                logmag[:, row, ncols + e] = lm
                sign[:, row, ncols + e] = sg
            row += 1
        for i in range(nf + k):
            v = vrows[:, i]
            for d in range(1, ncols + 1):
                scaled = _sp.ive(d + 1, 2 * v)
                logmag[:, row, d - 1] = (d - 3) * np.log(v) \
                    + np.log(np.abs(scaled)) + 2 * v
                sign[:, row, d - 1] = np.sign(scaled)
            logmag[:, row, ncols:] = klog[:, i, nf:]
            sign[:, row, ncols:] = ksign[:, i, nf:]
            row += 1
        dsign, dlog = slogdet_logentries(logmag, sign)
        chi = pts[:, -1]
        chit = lt[:, -1]
        logw = (2 * nu + 1) * np.log(st) - st**2 + 4 * np.log(chit) + np.log(chi)
        if nf:
            logw += np.sum(2 * np.log(mt), axis=1)
        if k > 1:
            logw += np.sum(4 * np.log(lt[:, :-1]) + np.log(pts[:, :-1]), axis=1)
        with np.errstate(over="ignore", invalid="ignore"):
            vals = dsign * nsign * np.exp(dlog + logw + base - nlog)
        return np.where(np.isfinite(vals), vals, 0.0)

    return f


def _kappa_pair_closed(x, y):
    """k0 in log form for one (x, y) column pair (vectorized)."""
    pair = np.stack([x, y], axis=1)
    lm, sg = _k0_log_pairs(pair)
    return lm[:, 0, 1], sg[:, 0, 1]


def spacing_pdf_asymptotic(params, sigma, spec=DEFAULT_SPEC, inner_order=48):
    """Limit density p_k(sigma) through the general determinant path."""
    sigma = float(sigma)
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    cut = sigma_tilde_max(params.k) - sigma
    if cut <= 0:
        return 0.0
    f = _integrand_general(params, sigma)
    val, _ = integrate_nested(f, params.k, spec, symmetric=True,
                              inner_order=inner_order, outer_cutoff=cut)
    return float(val)


def _quenched_k0_matrix(y):
    """Plain-float limiting-kernel matrix over argument list y (npts, m);
    arguments here stay of order sigma_tilde_max, safely inside double
    range even after the exp(2(x+y)) rescaling."""
    core = _k0_core_pairs(y)
    return core * np.exp(2.0 * (y[:, :, None] + y[:, None, :]))


def _det_small(mats):
    """Determinants of (npts, m, m) stacks, closed form through m = 3."""
    m = mats.shape[-1]
    if m == 1:
        return mats[:, 0, 0]
    if m == 2:
        return mats[:, 0, 0] * mats[:, 1, 1] - mats[:, 0, 1] * mats[:, 1, 0]
    if m == 3:
        a, b, c = mats[:, 0, 0], mats[:, 0, 1], mats[:, 0, 2]
        d, e, f = mats[:, 1, 0], mats[:, 1, 1], mats[:, 1, 2]
        g, h, i = mats[:, 2, 0], mats[:, 2, 1], mats[:, 2, 2]
        return a * (e * i - f * h) - b * (d * i - f * g) + c * (d * h - e * g)
    return det_rowscaled(mats)


def spacing_pdf_quenched_k1(sigma):
    """k = 1 quenched shortcut: a single explicit integral (vectorized)."""
    scalar = np.ndim(sigma) == 0
    sigma = np.atleast_1d(np.asarray(sigma, dtype=float))
    if np.any(sigma <= 0):
        raise ValueError("sigma must be positive")
    out = np.zeros(sigma.shape)
    for i, sv in enumerate(sigma):
        cut = sigma_tilde_max(1) - sv
        if cut <= 0:
            continue

        def f(chi):
            st = chi + sv
            z = 2.0 * np.sqrt(sv * (2 * chi + sv))
            bracket = _sp.ive(2, z) ** 2 - _sp.ive(3, z) * _sp.ive(1, z)
            return 4.0 * chi * st * bracket * np.exp(2 * z - st * st)

        out[i], _ = integrate_1d(f, 0.0, cut, DEFAULT_SPEC, vectorized=True)
    return float(out[0]) if scalar else out


def _outer_nodes(cut, order):
    """Outer chi rule: a dense panel where the Gaussian mass lives plus a
    coarser one covering the kernel-growth tail."""
    split = min(6.0, cut)
    x1, w1 = gauss_legendre(order, 0.0, split)
    if cut <= split:
        return x1, w1
    x2, w2 = gauss_legendre(max(order // 2, 24), split, cut)
    return np.concatenate([x1, x2]), np.concatenate([w1, w2])


def spacing_pdf_quenched(k, sigma, inner_order=None, outer_order=None):
    """Quenched (nu = nf = 0) k-th spacing via the determinant of limiting
    kernels over the shifted variables; vectorized over sigma.

    The outer integral uses fixed high-order Gauss-Legendre panels on the
    truncated range (the integrand is entire and Gaussian-damped), the inner
    box a fixed product rule.  The default orders keep the relative error
    near 1e-10 (checked against doubled orders and the adaptive path).
    """
    if not (1 <= k <= MAX_K):
        raise ValueError(f"k must be in 1..{MAX_K}")
    if inner_order is None:
        inner_order = 32 if k <= 2 else 24
    if outer_order is None:
        outer_order = 96 if k <= 2 else 64
    scalar = np.ndim(sigma) == 0
    sigma = np.atleast_1d(np.asarray(sigma, dtype=float))
    if np.any(sigma <= 0):
        raise ValueError("sigma must be positive")
    pref = 2.0 / factorial(k - 1)
    out = np.zeros(sigma.shape)
    xin, win = gauss_legendre(inner_order, 0.0, 1.0) if k > 1 else (None, None)
    for i, sv in enumerate(sigma):
        cut = sigma_tilde_max(k) - sv
        if cut <= 0:
            continue
        chi, wchi = _outer_nodes(cut, outer_order)
        if k == 1:
            pts = chi[:, None]
            wts = wchi
        else:
            inner_grids = np.meshgrid(*([xin] * (k - 1)), indexing="ij")
            inner_pts = np.stack([g.ravel() for g in inner_grids], axis=1)
            inner_w = np.ones(inner_pts.shape[0])
            for g in np.meshgrid(*([win] * (k - 1)), indexing="ij"):
                inner_w *= g.ravel()
            npts_in = inner_pts.shape[0]
            lam = (chi[:, None, None] * inner_pts[None, :, :]).reshape(-1, k - 1)
            pts = np.concatenate([lam, np.repeat(chi, npts_in)[:, None]], axis=1)
            wts = (wchi[:, None] * inner_w[None, :] *
                   (chi[:, None] ** (k - 1))).ravel()
        st = pts[:, -1] + sv
        lt = np.sqrt(np.maximum(st[:, None] ** 2 - pts**2, 0.0))
        mats = _quenched_k0_matrix(lt)
        dets = _det_small(mats)
        w = st * np.exp(-st**2) * lt[:, -1] ** 4 * pts[:, -1]
        if k > 1:
            w *= np.prod(lt[:, :-1] ** 4 * pts[:, :-1], axis=1)
        out[i] = pref * float(np.dot(wts, w * dets))
    return float(out[0]) if scalar else out


def _pdf_dispatch(params, sigma_grid):
    if params.nu == 0 and params.nf == 0:
        if params.k == 1:
            return spacing_pdf_quenched_k1(sigma_grid)
        return spacing_pdf_quenched(params.k, sigma_grid)
    return np.array([spacing_pdf_asymptotic(params, sv) for sv in np.atleast_1d(sigma_grid)])


@lru_cache(maxsize=32)
def mean_spacing(params):
    """First moment sigma_bar_k of the limit spacing (relative ~1e-7)."""
    smax = sigma_tilde_max(params.k)
    if params.nu == 0 and params.nf == 0:
        order = 320 if params.k == 1 else (192 if params.k == 2 else 128)
        nodes, wts = gauss_legendre(order, 0.0, smax)
        pdf = _pdf_dispatch(params, nodes)
        return float(np.dot(wts, nodes * pdf))
    f = lambda s: s * spacing_pdf_asymptotic(params, s)
    val, _ = integrate_1d(f, 1e-8, smax,
                          QuadratureSpec(abs_tol=1e-9, rel_tol=1e-7),
                          vectorized=False, order=10)
    return float(val)


def spacing_pdf_unfolded(params, s):
    """Unfolded curve pbar(s) = sigma_bar * p(sigma_bar * s); unit mean."""
    sbar = mean_spacing(params)
    scalar = np.ndim(s) == 0
    s = np.atleast_1d(np.asarray(s, dtype=float))
    out = sbar * np.asarray(_pdf_dispatch(params, sbar * s), dtype=float)
    return float(out[0]) if scalar else out


def tabulate_asymptotic(params, s_grid=None, unfold=False, points=240):
    """TabulatedDistribution of the limit spacing (optionally unit-mean)."""
    if s_grid is None:
        hi = sigma_tilde_max(params.k) if not unfold else 4.5
        s_grid = np.linspace(1e-3 if not unfold else 5e-3, hi, points)
    s_grid = np.asarray(s_grid, dtype=float)
    if unfold:
        pdf = spacing_pdf_unfolded(params, s_grid)
    else:
        pdf = np.asarray(_pdf_dispatch(params, s_grid), dtype=float)
    return TabulatedDistribution(s_grid, np.maximum(pdf, 0.0))
