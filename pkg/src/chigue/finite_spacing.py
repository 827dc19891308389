"""Exact k-th spacing distribution of the chi-GUE at finite matrix size.

The distribution between the k-th and (k+1)-st smallest singular values is a
k-fold integral over a determinant of size nf + nu + k whose entries are
Laguerre polynomials and finite-n kernels at shifted (negated squared)
arguments, normalised by a flavour partition function.  Brute-force
quadrature oracles over the raw joint eigenvalue density are provided for
n <= 3 so every piece of the determinant chain can be validated end to end.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from math import factorial

import numpy as np

from ._linalg import condition_estimate, det_rowscaled, slogdet_rowscaled
from .kernels import EPS_DIAG, laguerre_kernel, laguerre_kernel_diag
from .quadrature import (QuadratureSpec, gauss_legendre, integrate_1d,
                         integrate_nested)
from .refstats import TabulatedDistribution
from .specfun import laguerre, laguerre_family, log_factorial, log_ratio_factorials

TAIL = 1e-18
_LOG_TAIL = -np.log(TAIL)


def stilde_max(n, k):
    """Truncation point of x_k + s in the outer integral.

    Balances the Gaussian exp(-(n-k) stilde^2) against the growth
    exp(4 k sqrt(n) stilde) the kernel entries can reach, with margin for
    the polynomial prefactors; the discarded tail sits below ~1e-16.
    """
    nk = n - k
    return (2.0 * k * np.sqrt(n) + np.sqrt(4.0 * k * k * n + nk * 81.0)) / nk

# the determinant evaluation destabilises beyond these (larger settings are
# the Monte-Carlo sampler's job)
MAX_K = 4
MAX_NU = 4
MAX_NF = 3
MAX_N = 200

MASS_DEGENERACY_TOL = 1e-9

DEFAULT_SPEC = QuadratureSpec(abs_tol=1e-12, rel_tol=1e-9)


class DegenerateMassError(ValueError):
    """Masses too close for the determinant formulas (confluent limit not
    implemented; perturb the masses instead)."""


@dataclass(frozen=True)
class SpacingParams:
    """Which spacing distribution: (k, n, nu, nf, masses)."""

    k: int
    n: int
    nu: int = 0
    nf: int = 0
    masses: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "masses", tuple(float(m) for m in self.masses))
        if not (1 <= self.k <= MAX_K):
            raise ValueError(f"k must be in 1..{MAX_K}")
        if not (0 <= self.nu <= MAX_NU):
            raise ValueError(f"nu must be in 0..{MAX_NU}")
        if not (0 <= self.nf <= MAX_NF):
            raise ValueError(f"nf must be in 0..{MAX_NF}")
        if len(self.masses) != self.nf:
            raise ValueError("need exactly nf masses")
        if any(m <= 0 for m in self.masses):
            raise ValueError("masses must be positive")
        if not (self.k + 1 <= self.n <= MAX_N):
            raise ValueError(f"n must be in k+1..{MAX_N}")
        _check_distinct(self.masses)


def _check_distinct(masses):
    m2 = np.asarray(masses, dtype=float) ** 2
    for i in range(len(m2)):
        for j in range(i + 1, len(m2)):
            if abs(m2[i] - m2[j]) <= MASS_DEGENERACY_TOL * max(1.0, m2[i], m2[j]):
                raise DegenerateMassError(
                    f"masses {masses[i]} and {masses[j]} are numerically degenerate"
                )


def _vandermonde_squares_log(values):
    """(sign, log|prod_{a<b} (v_b^2 - v_a^2)|)."""
    v2 = np.asarray(values, dtype=float) ** 2
    sign = 1.0
    logmag = 0.0
    for i in range(len(v2)):
        for j in range(i + 1, len(v2)):
            d = v2[j] - v2[i]
            sign *= np.sign(d)
            logmag += np.log(abs(d))
    return sign, logmag


def _mass_det_log(nu, n, masses):
    """(sign, log|det[m_a^{2b-2} L_n^{(nu+b-1)}(-m_a^2)]|); empty det = 1."""
    nf = len(masses)
    if nf == 0:
        return 1.0, 0.0
    m = np.asarray(masses, dtype=float)
    mat = np.empty((nf, nf))
    for b in range(1, nf + 1):
        mat[:, b - 1] = m ** (2 * b - 2) * laguerre(n, nu + b - 1, -m * m)
    sign, logmag = slogdet_rowscaled(mat)
    return float(sign), float(logmag)


def partition_function(nu, n, masses=()):
    """log Z for the ensemble with nf flavour masses (the value is positive).

    Without flavours this is n! * prod_j j!(j+nu)!/2; with them the
    flavour determinant over the Vandermonde of squared masses enters.
    """
    if n < 1 or nu < 0:
        raise ValueError("need n >= 1 and nu >= 0")
    _check_distinct(masses)
    base = log_factorial(n) + sum(
        log_factorial(j) + log_factorial(j + nu) - np.log(2.0) for j in range(n)
    )
    nf = len(masses)
    if nf == 0:
        return base
    base += nf * log_factorial(n)
    dsign, dlog = _mass_det_log(nu, n, masses)
    vsign, vlog = _vandermonde_squares_log(masses)
    if dsign * vsign <= 0:
        raise ArithmeticError("partition function came out nonpositive")
    return base + dlog - vlog


def _shifted_squares(params, pts, s):
    """stilde^2 and the squared shifted variables for points (npts, k).

    Columns of pts are x_1..x_{k-1}, x_k.  Returns (u, mt2, xt2) with
    u = stilde^2 (npts,), mt2 (npts, nf), xt2 (npts, k); xt2[:, j] =
    stilde^2 - x_{j+1}^2, which for j = k-1 equals s(2 x_k + s).
    """
    xk = pts[:, -1]
    st = xk + s
    u = st * st
    mt2 = u[:, None] + np.asarray(params.masses)[None, :] ** 2 if params.nf else \
        np.zeros((len(pts), 0))
    xt2 = u[:, None] - pts**2
    return u, mt2, xt2


def _ktilde_column(a, n, u, xt2_col):
    """Modified-kernel column entries for derivative order a (>= 2),
    vectorized over points; arguments are the positive squared variables."""
    fam_s = laguerre_family(n + a - 3, 3 - a, -u)
    fam_x = laguerre_family(n - 2, 2, -xt2_col)
    total = np.zeros(u.shape)
    for j in range(n - 1):
        w = 2.0 * np.exp(log_ratio_factorials([j + a - 1], [j + 2]))
        total += w * fam_s[j + a - 1] * fam_x[j]
    return np.exp(log_ratio_factorials([n - 1], [n + a - 2])) * u ** (1 - a) * total


def _kernel_block(n, u_left, u_right):
    """K_{2,n-1} at (-u_left, -u_right), vectorized, diagonal-safe."""
    near = np.abs(u_left - u_right) < EPS_DIAG * np.maximum(1.0, np.abs(u_left))
    out = np.where(
        near,
        np.atleast_1d(laguerre_kernel_diag(2, n - 1, -0.5 * (u_left + u_right))),
        np.atleast_1d(laguerre_kernel(2, n - 1, -u_left, -u_right)),
    )
    return out


def _block_determinant_entries(params, pts, s):
    """The (npts, M, M) determinant stack of the spacing integrand,
    M = nf + nu + k."""
    nu, nf, k, n = params.nu, params.nf, params.k, params.n
    npts = pts.shape[0]
    ncols = nf + nu
    m = ncols + k
    u, mt2, xt2 = _shifted_squares(params, pts, s)
    mats = np.empty((npts, m, m))
    row = 0
    for a in range(1, nu + 1):
        for d in range(1, ncols + 1):
            mats[:, row, d - 1] = u ** (d - a) * laguerre(n + a - 2, d - a + 2, -u)
        for e in range(k):
            if a == 1:
                mats[:, row, ncols + e] = _kernel_block(n, u, xt2[:, e])
            else:
                mats[:, row, ncols + e] = _ktilde_column(a, n, u, xt2[:, e])
        row += 1
    for b in range(nf):
        mb2 = mt2[:, b]
        for d in range(1, ncols + 1):
            mats[:, row, d - 1] = mb2 ** (d - 1) * laguerre(n - 1, d + 1, -mb2)
        for e in range(k):
            mats[:, row, ncols + e] = _kernel_block(n, mb2, xt2[:, e])
        row += 1
    for c in range(k):
        xc2 = xt2[:, c]
        for d in range(1, ncols + 1):
            mats[:, row, d - 1] = xc2 ** (d - 1) * laguerre(n - 1, d + 1, -xc2)
        for e in range(k):
            mats[:, row, ncols + e] = _kernel_block(n, xc2, xt2[:, e])
        row += 1
    return mats


def z2_shifted(params, xs, s):
    """(sign, log|Z|) of the shifted-mass partition function with
    nf + nu + 2k flavours, n - k - 1 eigenvalues and two zero modes.

    xs are the k inner positions (0 <= x_j <= x_k listed last), s > 0 the
    spacing.  Emits a warning when the determinant's condition number
    suggests a relative error above 1e-6.
    """
    xs = np.asarray(xs, dtype=float)
    if xs.shape != (params.k,):
        raise ValueError("xs must hold exactly k positions")
    if np.any(xs < 0) or np.any(xs[:-1] > xs[-1]) or s <= 0:
        raise ValueError("need 0 <= x_j <= x_k and s > 0")
    if params.n - params.k - 1 < 0:
        raise ValueError("need n >= k + 1")
    nu, nf, k, n = params.nu, params.nf, params.k, params.n
    pts = xs[None, :]
    mats = _block_determinant_entries(params, pts, s)
    cond = condition_estimate(mats[0])
    if cond * np.finfo(float).eps > 1e-6:
        warnings.warn(
            f"shifted partition determinant conditioning ~{cond:.2e}; "
            "relative error may exceed 1e-6",
            RuntimeWarning,
            stacklevel=2,
        )
    dsign, dlog = slogdet_rowscaled(mats)
    dsign, dlog = float(dsign[0]), float(dlog[0])
    pref = (1 - n) * np.log(2.0) + log_factorial(n - k - 1) \
        + nf * log_factorial(n - 1) \
        + sum(log_factorial(j) for j in range(n + 1)) \
        + sum(log_factorial(l + nu) for l in range(n - 1))
    vx_sign, vx_log = _vandermonde_squares_log(xs)
    vm_sign, vm_log = _vandermonde_squares_log(params.masses)
    masses = np.asarray(params.masses, dtype=float)
    cross = 0.0
    for mf in masses:
        cross += 2 * nu * np.log(mf) + np.sum(np.log(mf**2 + xs**2))
    cross += 2 * nu * np.sum(np.log(xs))
    sign = dsign * vm_sign * (vx_sign**2)
    logmag = pref + dlog - 2 * vx_log - vm_log - cross
    return sign, logmag


def _spacing_prefactor_log(params):
    """(sign, log) of the constant in front of the k-fold integral."""
    nu, nf, k, n = params.nu, params.nf, params.k, params.n
    dsign, dlog = _mass_det_log(nu, n, params.masses)
    logmag = np.log(2.0) + log_factorial(n) - log_factorial(k - 1) \
        - nf * np.log(n) - log_factorial(n - 1 + nu) - dlog
    for mf in params.masses:
        logmag -= 2 * nu * np.log(mf)
    return dsign, logmag


def _integrand_factory(params, s, log_prefactor):
    nu, nf, k = params.nu, params.nf, params.k
    n = params.n

    def integrand(pts):
        u, mt2, xt2 = _shifted_squares(params, pts, s)
        st = pts[:, -1] + s
        logw = (2 * nu + 1) * np.log(st) - (n - k) * u
        if nf:
            logw += np.sum(np.log(mt2), axis=1)
        logw += np.sum(2 * np.log(np.abs(xt2)) + np.log(pts) - pts**2, axis=1)
        mats = _block_determinant_entries(params, pts, s)
        dsign, dlog = slogdet_rowscaled(mats)
        with np.errstate(over="ignore", invalid="ignore"):
            vals = dsign * np.exp(dlog + logw + log_prefactor)
        return np.where(np.isfinite(vals), vals, 0.0)

    return integrand


def outer_cutoff(params, s):
    """Largest x_k the outer integral needs at spacing s."""
    return max(stilde_max(params.n, params.k) - s, 0.0)


def spacing_pdf_finite(params, s, spec=DEFAULT_SPEC, inner_order=48):
    """p_{k,n}(s) for the parameter set; k-fold integral over the
    determinant representation."""
    s = float(s)
    if s <= 0:
        raise ValueError("s must be positive")
    cut = outer_cutoff(params, s)
    if cut <= 0:
        return 0.0
    psign, plog = _spacing_prefactor_log(params)
    integrand = _integrand_factory(params, s, 0.0)
    val, _ = integrate_nested(integrand, params.k, spec, symmetric=True,
                              inner_order=inner_order, outer_cutoff=cut)
    return float(psign * val * np.exp(plog))


def spacing_pdf_quenched_k1(n, s, spec=DEFAULT_SPEC):
    """Spacing of the two smallest eigenvalues at nu = nf = 0: the explicit
    one-fold integral with the equal-argument kernel bracket.

    Vectorized over s.
    """
    if n < 2:
        raise ValueError("n must be >= 2")
    scalar = np.ndim(s) == 0
    s = np.atleast_1d(np.asarray(s, dtype=float))
    if np.any(s <= 0):
        raise ValueError("s must be positive")
    out = np.empty(s.shape)
    for i, sv in enumerate(s):
        cut = max(stilde_max(n, 1) - sv, 0.0)
        if cut == 0.0:
            out[i] = 0.0
            continue

        def f(x):
            z = sv * (2 * x + sv)
            bracket = (laguerre_family(n - 1, 2, -z)[n - 1] * laguerre_family(n - 2, 2, -z)[n - 2]
                       - laguerre_family(n - 2, 3, -z)[n - 2] * laguerre_family(n - 1, 1, -z)[n - 1])
            return 4.0 * z * z * x * (x + sv) * np.exp(-x * x - (n - 1) * (x + sv) ** 2) * bracket

        out[i], _ = integrate_1d(f, 0.0, cut, spec, vectorized=True)
    return float(out[0]) if scalar else out


def _jpdf_weight_log(nu, masses, xs):
    """log of the unnormalised joint density at points xs (npts, n)."""
    npts, n = xs.shape
    logw = np.zeros(npts)
    x2 = xs**2
    with np.errstate(divide="ignore"):
        for a in range(n):
            for b in range(a + 1, n):
                logw += 2 * np.log(np.abs(x2[:, b] - x2[:, a]))
        logw += np.sum((2 * nu + 1) * np.log(xs) - x2, axis=1)
    for mf in masses:
        logw += np.sum(np.log(x2 + mf * mf), axis=1)
    return logw


def _z_direct(n, nu, masses, order=80, cutoff=7.5):
    """Partition function by raw n-dim product quadrature (oracle use)."""
    nodes, wts = gauss_legendre(order, 0.0, cutoff)
    grids = np.meshgrid(*([nodes] * n), indexing="ij")
    pts = np.stack([g.ravel() for g in grids], axis=1)
    weight = np.ones(pts.shape[0])
    for g in np.meshgrid(*([wts] * n), indexing="ij"):
        weight *= g.ravel()
    return float(np.dot(weight, np.exp(_jpdf_weight_log(nu, masses, pts))))


def brute_force_spacing(n, k, nu, nf, masses, s, order=120):
    """Direct-definition oracle: quadrature of the raw joint density with the
    combinatorial prefactor n!/((k-1)!(n-k-1)!).  Only n <= 3.
    """
    if n > 3:
        raise ValueError("the brute-force oracle is for n <= 3")
    if not (1 <= k <= n - 1):
        raise ValueError("need 1 <= k <= n-1")
    masses = tuple(masses)
    if len(masses) != nf:
        raise ValueError("need exactly nf masses")
    s = float(s)
    z = _z_direct(n, nu, masses)
    comb = factorial(n) / (factorial(k - 1) * factorial(n - k - 1))
    cutoff = 7.5

    def w_rows(rows):
        return np.exp(_jpdf_weight_log(nu, masses, rows))

    if n == 2:
        x, wx = gauss_legendre(order, 0.0, cutoff)
        rows = np.stack([x, x + s], axis=1)
        val = float(np.dot(wx, w_rows(rows)))
    elif n == 3 and k == 1:
        x, wx = gauss_legendre(order, 0.0, cutoff)
        val = 0.0
        for xi, wi in zip(x, wx):
            y, wy = gauss_legendre(order, xi + s, xi + s + cutoff)
            rows = np.stack([np.full_like(y, xi), np.full_like(y, xi + s), y], axis=1)
            val += wi * float(np.dot(wy, w_rows(rows)))
    else:  # n == 3, k == 2
        x2, w2 = gauss_legendre(order, 0.0, cutoff)
        val = 0.0
        for xi, wi in zip(x2, w2):
            if xi <= 0:
                continue
            y, wy = gauss_legendre(order, 0.0, xi)
            rows = np.stack([y, np.full_like(y, xi), np.full_like(y, xi + s)], axis=1)
            val += wi * float(np.dot(wy, w_rows(rows)))
    return comb * val / z


def gap_probability_smalln(n, k, nu, a, b, masses=(), order=96):
    """E_k([a,b]) by direct quadrature: k eigenvalues below a, none in
    [a,b], the rest above b.  Only n <= 3."""
    if n > 3:
        raise ValueError("direct gap probabilities are for n <= 3")
    if not (0 <= k <= n):
        raise ValueError("need 0 <= k <= n")
    if a < 0 or b < a:
        raise ValueError("need 0 <= a <= b")
    if np.isinf(b):
        return 1.0 if k == n else 0.0
    z = _z_direct(n, nu, tuple(masses))
    comb = factorial(n) / (factorial(k) * factorial(n - k))
    cutoff = b + 7.5
    lows = []
    if k > 0:
        if a == 0:
            return 0.0
        nodes, wts = gauss_legendre(order, 0.0, a)
        lows = [(nodes, wts)] * k
    highs = [(gauss_legendre(order, b, cutoff))] * (n - k)
    dims = lows + highs
    grids = np.meshgrid(*[d[0] for d in dims], indexing="ij")
    pts = np.stack([g.ravel() for g in grids], axis=1)
    weight = np.ones(pts.shape[0])
    for g in np.meshgrid(*[d[1] for d in dims], indexing="ij"):
        weight *= g.ravel()
    val = float(np.dot(weight, np.exp(_jpdf_weight_log(nu, tuple(masses), pts))))
    return comb * val / z


def mean_spacing_finite(params, spec=None):
    """First moment of p_{k,n} by adaptive quadrature."""
    spec = spec or QuadratureSpec(abs_tol=1e-10, rel_tol=1e-8)
    smax = stilde_max(params.n, params.k)
    if params.k == 1 and params.nu == 0 and params.nf == 0:
        f = lambda s: s * spacing_pdf_quenched_k1(params.n, s)
        val, _ = integrate_1d(f, 1e-8, smax, spec, vectorized=True)
    else:
        f = lambda s: s * spacing_pdf_finite(params, s)
        val, _ = integrate_1d(f, 1e-8, smax, spec, vectorized=False, order=10)
    return float(val)


def tabulate_spacing_finite(params, s_grid=None, unfold=False, points=200):
    """TabulatedDistribution of p_{k,n} (optionally rescaled to unit mean)."""
    quench = params.k == 1 and params.nu == 0 and params.nf == 0
    if s_grid is None:
        smax = stilde_max(params.n, params.k)
        s_grid = np.linspace(smax * 1e-4, smax, points)
    s_grid = np.asarray(s_grid, dtype=float)
    if quench:
        pdf = spacing_pdf_quenched_k1(params.n, s_grid)
    else:
        pdf = np.array([spacing_pdf_finite(params, sv) for sv in s_grid])
    if unfold:
        # rescale to unit first moment: pbar(s) = sbar * p(sbar * s)
        sbar = mean_spacing_finite(params)
        return TabulatedDistribution(s_grid / sbar, np.maximum(pdf, 0.0) * sbar)
    return TabulatedDistribution(s_grid, np.maximum(pdf, 0.0))
