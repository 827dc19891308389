"""Hard-edge unfolding map and unfolded microscopic densities.

The map g stretches the eigenvalue axis so the mean spacing is one.  For
index nu it reads

    g(x) = (1/pi) [ x sqrt(1 - nu^2/x^2) - nu arccos(nu/x) ],   x >= nu,
    g(x) = (1/pi) [ x sqrt(nu^2/x^2 - 1) - nu arccosh(nu/x) ],  0 < x < nu,

continuous and strictly increasing on the positive axis with g(nu) = 0.  The
lower branch is negative (it tends to -infinity as x -> 0+), mirroring the
soft-edge picture in which the spectrum is reflected at the origin so that
the bulk lies to the right; the unfolded variable of the deep sub-edge
region therefore carries a minus sign.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .kernels import bessel_density, laguerre_kernel_diag
from .specfun import airy


def _g_arr(nu, x):
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise ValueError("the unfolding map is defined for x > 0")
    if nu == 0:
        return x / np.pi
    out = np.empty(x.shape)
    hi = x >= nu
    xh = x[hi]
    out[hi] = (np.sqrt(np.maximum(xh * xh - nu * nu, 0.0)) - nu * np.arccos(np.clip(nu / xh, -1, 1))) / np.pi
    xl = x[~hi]
    out[~hi] = (np.sqrt(np.maximum(nu * nu - xl * xl, 0.0)) - nu * np.arccosh(nu / xl)) / np.pi
    return out


@dataclass(frozen=True)
class UnfoldMap:
    """Unfolding map for zero-mode index nu, with inverse and Jacobian."""

    nu: int

    def __post_init__(self):
        if self.nu < 0 or self.nu != int(self.nu):
            raise ValueError("nu must be a nonnegative integer")

    def g(self, x):
        out = _g_arr(self.nu, x)
        return float(out) if np.ndim(x) == 0 else out

    def inverse(self, lam):
        """x such that g(x) = lam (monotone bracketing + Brent)."""
        scalar = np.ndim(lam) == 0
        lam = np.atleast_1d(np.asarray(lam, dtype=float))
        nu = self.nu
        if nu == 0:
            if np.any(lam <= 0):
                raise ValueError("lam out of range of g for nu = 0")
            out = np.pi * lam
            return float(out[0]) if scalar else out
        out = np.empty(lam.shape)
        for i, lv in enumerate(lam.ravel()):
            if lv == 0.0:
                out.ravel()[i] = float(nu)
                continue
            if lv > 0:
                lo, hi = float(nu), nu + np.pi * (lv + 0.5 * nu) + 10.0
                while _g_arr(nu, np.array([hi]))[0] < lv:
                    hi *= 2.0
            else:
                lo, hi = nu * 1e-9, float(nu)
                while _g_arr(nu, np.array([lo]))[0] > lv:
                    lo *= 1e-3
                    if lo < 1e-280:
                        raise ValueError(f"lam = {lv} below the range of g")
            out.ravel()[i] = brentq(lambda t: _g_arr(nu, np.array([t]))[0] - lv,
                                    lo, hi, xtol=1e-14, rtol=8.9e-16)
        return float(out[0]) if scalar else out

    def jacobian(self, lam):
        """dx/dlam evaluated at x(lam)."""
        x = np.atleast_1d(self.inverse(lam))
        nu = self.nu
        with np.errstate(divide="ignore"):
            j = np.where(x >= nu,
                         np.pi / np.sqrt(np.maximum(1 - (nu / x) ** 2, 0)),
                         np.pi / np.sqrt(np.maximum((nu / x) ** 2 - 1, 0)))
        return float(j[0]) if np.ndim(lam) == 0 else j


def unfolded_bessel_density(nu, lam):
    """Unfolded hard-edge density R_unf(lam) for zero-mode index nu."""
    m = UnfoldMap(nu)
    scalar = np.ndim(lam) == 0
    lam = np.atleast_1d(np.asarray(lam, dtype=float))
    x = np.atleast_1d(m.inverse(lam))
    out = bessel_density(nu, x) * np.atleast_1d(m.jacobian(lam))
    return float(out[0]) if scalar else out


def unfolded_airy_density(lam):
    """Unfolded soft-edge density; +inf at the integrable lam = 0 spike."""
    scalar = np.ndim(lam) == 0
    lam = np.atleast_1d(np.asarray(lam, dtype=float))
    out = np.empty(lam.shape)
    zero = lam == 0.0
    out[zero] = np.inf
    lv = lam[~zero]
    s = np.sign(lv)
    arg = -s * (3 * np.pi * np.abs(lv) / 2) ** (2.0 / 3.0)
    ai, aip = airy(arg)
    out[~zero] = (s * (3 * np.pi**4 * np.abs(lv) / 2) ** (1.0 / 3.0) * ai**2
                  + (2 * np.pi**2 / (3 * np.abs(lv))) ** (1.0 / 3.0) * aip**2)
    return float(out[0]) if scalar else out


def finite_n_density(nu, n, x):
    """Spectral density at matrix size n, normalised to n eigenvalues."""
    scalar = np.ndim(x) == 0
    x = np.atleast_1d(np.asarray(x, dtype=float))
    out = x ** (2 * nu + 1) * np.exp(-x * x) * np.atleast_1d(
        laguerre_kernel_diag(nu, n, x * x))
    return float(out[0]) if scalar else out
