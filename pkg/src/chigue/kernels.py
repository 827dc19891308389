"""Correlation kernels: sine, Bessel, Airy, finite-n Laguerre (Christoffel-
Darboux), the derivative-modified finite-n kernel, and the limiting kernel
family built from modified Bessel functions.

Equal or nearly equal arguments never go through the two-term quotient forms;
each kernel has a dedicated diagonal formula and a relative switch width
(EPS_DIAG, EPS_LIMITING below) at which evaluation hands off to it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import special as _sp

from .quadrature import QuadratureSpec, integrate_1d
from .specfun import laguerre_family, log_ratio_factorials

# relative half-width of the diagonal handoff for quotient-form kernels: the
# two-term numerators lose ~6 digits inside this window
EPS_DIAG = 1e-6
# wider switch for the limiting kernel, whose removable singularity sits in
# (y^2 - x^2)
EPS_LIMITING = 1e-4

_KAPPA_SPEC = QuadratureSpec(abs_tol=1e-12, rel_tol=1e-12)


def sine_kernel(x, y):
    """sin(pi(x-y)) / (pi(x-y)); 1 on the diagonal."""
    return np.sinc(np.asarray(x, dtype=float) - y)


def bessel_kernel(nu, x, y):
    """Hard-edge kernel built from J_nu; x, y >= 0 (broadcastable)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if np.any(x < 0) or np.any(y < 0):
        raise ValueError("bessel_kernel needs nonnegative arguments")
    x, y = np.broadcast_arrays(x, y)
    near = np.abs(x - y) < EPS_DIAG * np.maximum(1.0, np.abs(x))
    xs = np.where(near, x + 1.0, x)  # keep the quotient finite where unused
    ys = np.where(near, y, y)
    num = ys * _sp.jv(nu, xs) * _sp.jv(nu - 1, ys) - xs * _sp.jv(nu, ys) * _sp.jv(nu - 1, xs)
    off = np.sqrt(xs * ys) * num / (xs**2 - ys**2)
    mid = 0.5 * (x + y)
    diag = bessel_density(nu, mid)
    out = np.where(near, diag, off)
    return out if out.ndim else float(out)


def bessel_density(nu, x):
    """Equal-argument Bessel kernel (x/2)(J_nu^2 - J_{nu-1} J_{nu+1})."""
    x = np.asarray(x, dtype=float)
    val = 0.5 * x * (_sp.jv(nu, x) ** 2 - _sp.jv(nu - 1, x) * _sp.jv(nu + 1, x))
    return val if val.ndim else float(val)


def airy_kernel(x, y):
    """Soft-edge kernel; diagonal is Ai'(x)^2 - x Ai(x)^2."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    x, y = np.broadcast_arrays(x, y)
    near = np.abs(x - y) < EPS_DIAG * np.maximum(1.0, np.abs(x))
    ax, apx, _, _ = _sp.airy(x)
    ay, apy, _, _ = _sp.airy(y)
    denom = np.where(near, 1.0, x - y)
    off = (ax * apy - apx * ay) / denom
    mid = 0.5 * (x + y)
    am, apm, _, _ = _sp.airy(mid)
    diag = apm**2 - mid * am**2
    out = np.where(near, diag, off)
    return out if out.ndim else float(out)


def laguerre_kernel(nu, n, u, v):
    """Finite-n chi-GUE pre-kernel in the squared variables u, v.

    Christoffel-Darboux two-term form away from the diagonal, the
    non-cancelling equal-argument form on it.  u, v may be negative (the
    shifted-mass formulas evaluate at -stilde^2 etc.).
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    scalar = np.ndim(u) == 0 and np.ndim(v) == 0
    u, v = np.broadcast_arrays(np.atleast_1d(np.asarray(u, dtype=float)),
                               np.atleast_1d(np.asarray(v, dtype=float)))
    near = np.abs(u - v) < EPS_DIAG * np.maximum(1.0, np.abs(u))
    pref = 2.0 * np.exp(log_ratio_factorials([n], [n + nu - 1]))
    fam_u = laguerre_family(n, nu, u)
    fam_v = laguerre_family(n, nu, v)
    denom = np.where(near, 1.0, u - v)
    off = pref * (fam_u[n - 1] * fam_v[n] - fam_u[n] * fam_v[n - 1]) / denom
    diag = _laguerre_diag_arr(nu, n, 0.5 * (u + v))
    out = np.where(near, diag, off)
    return float(out[0]) if scalar else out


def _laguerre_diag_arr(nu, n, u):
    pref = 2.0 * np.exp(log_ratio_factorials([n], [n + nu - 1]))
    fam = laguerre_family(n, nu, u)
    fam_up = laguerre_family(n - 1, nu + 1, u)
    if nu >= 1:
        low = laguerre_family(n, nu - 1, u)[n]
    else:
        # L_n^{(-1)}(u) = -u/n * L_{n-1}^{(1)}(u)
        low = -u / n * laguerre_family(n - 1, 1, u)[n - 1]
    return pref * (fam[n] * fam[n - 1] - fam_up[n - 1] * low)


def laguerre_kernel_diag(nu, n, u):
    """Equal-argument finite-n kernel, L'Hopital form with no leading-order
    cancellation at large n."""
    scalar = np.ndim(u) == 0
    out = _laguerre_diag_arr(nu, n, np.atleast_1d(np.asarray(u, dtype=float)))
    return float(out[0]) if scalar else out


def laguerre_kernel_sum(nu, n, u, v):
    """Plain orthogonal-polynomial sum form (reference path for tests)."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    fam_u = laguerre_family(n - 1, nu, u)
    fam_v = laguerre_family(n - 1, nu, v)
    total = 0.0
    for j in range(n):
        total = total + 2.0 * np.exp(log_ratio_factorials([j], [j + nu])) * fam_u[j] * fam_v[j]
    return total if np.ndim(total) else float(total)


def ktilde(a_minus_1, n, u, v):
    """Derivative-modified finite-n kernel at negated arguments (-u, -v).

    u, v >= 0 are the squared shifted variables.  a = a_minus_1 + 1 counts
    the derivative order; a = 1 is the plain kernel of order 2 and size n-1.
    The sum has positive terms throughout, so plain accumulation is
    cancellation-free; the per-term factorial ratios are carried in log form.
    """
    a = a_minus_1 + 1
    if a < 1:
        raise ValueError("a_minus_1 must be >= 0")
    if n < 2:
        raise ValueError("n must be >= 2")
    if a == 1:
        return laguerre_kernel(2, n - 1, -np.asarray(u, dtype=float), -np.asarray(v, dtype=float))
    scalar = np.ndim(u) == 0 and np.ndim(v) == 0
    u, v = np.broadcast_arrays(np.atleast_1d(np.asarray(u, dtype=float)),
                               np.atleast_1d(np.asarray(v, dtype=float)))
    fam_s = laguerre_family(n + a - 3, 3 - a, -u)
    fam_x = laguerre_family(n - 2, 2, -v)
    total = np.zeros(u.shape)
    for j in range(n - 1):
        w = 2.0 * np.exp(log_ratio_factorials([j + a - 1], [j + 2]))
        total += w * fam_s[j + a - 1] * fam_x[j]
    out = np.exp(log_ratio_factorials([n - 1], [n + a - 2])) * u ** (1 - a) * total
    return float(out[0]) if scalar else out


def limiting_kernel_diag(x):
    """Limiting kernel at equal arguments: (2/x^4)(I2(2x)^2 - I3(2x) I1(2x))."""
    x = np.asarray(x, dtype=float)
    val = 2.0 / x**4 * np.exp(4.0 * x) * (
        _sp.ive(2, 2 * x) ** 2 - _sp.ive(3, 2 * x) * _sp.ive(1, 2 * x)
    )
    return val if val.ndim else float(val)


def _k0_closed(x, y):
    # I2 cross-product integral in closed form.  The exponentially scaled
    # Bessel values keep x, y of order 10^3 finite; both terms share the
    # e^(2x+2y) factor.
    t1 = 2 * y * _sp.ive(1, 2 * y) * _sp.ive(2, 2 * x)
    t2 = 2 * x * _sp.ive(1, 2 * x) * _sp.ive(2, 2 * y)
    return (t1 - t2) * np.exp(2.0 * (x + y)) / ((x * y) ** 2 * (y**2 - x**2))


def limiting_kernel(a_minus_1, x, y):
    """Limiting kernel K_{a-1}(x, y) for positive arguments.

    a = 1 uses the closed Bessel cross-product form (diagonal form inside a
    relative window EPS_LIMITING of the removable singularity); a >= 2 falls
    back to adaptive Gauss-Legendre on [0, 1] at 1e-12 absolute tolerance.
    """
    a = a_minus_1 + 1
    if a < 1:
        raise ValueError("a_minus_1 must be >= 0")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if np.any(x <= 0) or np.any(y <= 0):
        raise ValueError("limiting_kernel needs positive arguments")
    if a == 1:
        x, y = np.broadcast_arrays(x, y)
        near = np.abs(y**2 - x**2) <= EPS_LIMITING * np.maximum(x**2, y**2)
        xs = np.where(near, x + 1.0, x)
        off = _k0_closed(xs, np.where(near, y, y))
        diag = limiting_kernel_diag(0.5 * (x + y))
        out = np.where(near, diag, off)
        return out if out.ndim else float(out)
    xf = float(x)
    yf = float(y)

    def integrand(t):
        return t**a * _sp.iv(3 - a, 2 * xf * t) * _sp.iv(2, 2 * yf * t)

    val, _ = integrate_1d(integrand, 0.0, 1.0, _KAPPA_SPEC, vectorized=True)
    return 4.0 * xf ** (-1 - a) * yf ** (-2) * val


def limiting_kernel_quadrature(a_minus_1, x, y, spec=_KAPPA_SPEC):
    """Integral-representation evaluation (independent of the closed form)."""
    a = a_minus_1 + 1
    xf = float(x)
    yf = float(y)

    def integrand(t):
        return t**a * _sp.iv(3 - a, 2 * xf * t) * _sp.iv(2, 2 * yf * t)

    val, _ = integrate_1d(integrand, 0.0, 1.0, spec, vectorized=True)
    return 4.0 * xf ** (-1 - a) * yf ** (-2) * val


def k0_log(x, y):
    """(log|K_0(x,y)|, sign), safe for arguments where I_nu overflows."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    x, y = np.broadcast_arrays(np.atleast_1d(x), np.atleast_1d(y))
    near = np.abs(y**2 - x**2) <= EPS_LIMITING * np.maximum(x**2, y**2)
    xs = np.where(near, x + 1.0, x)
    t1 = 2 * y * _sp.ive(1, 2 * y) * _sp.ive(2, 2 * xs)
    t2 = 2 * xs * _sp.ive(1, 2 * xs) * _sp.ive(2, 2 * y)
    core = (t1 - t2) / ((xs * y) ** 2 * (y**2 - xs**2))
    m = 0.5 * (x + y)
    diag = 2.0 / m**4 * (_sp.ive(2, 2 * m) ** 2 - _sp.ive(3, 2 * m) * _sp.ive(1, 2 * m))
    core = np.where(near, diag, core)
    with np.errstate(divide="ignore"):
        logmag = np.log(np.abs(core)) + 2.0 * (x + y)
    return logmag, np.sign(core)


@dataclass(frozen=True)
class KernelEval:
    """Immutable dispatcher over the kernel family; safe to share between
    threads (every evaluation is pure)."""

    kind: str
    nu: int = 0
    n: int = 0
    a_minus_1: int = 0

    _KINDS = ("sine", "bessel", "airy", "laguerre_finite", "ktilde", "limiting")

    def __post_init__(self):
        if self.kind not in self._KINDS:
            raise ValueError(f"unknown kernel kind {self.kind!r}")

    def __call__(self, x, y):
        if self.kind == "sine":
            return sine_kernel(x, y)
        if self.kind == "bessel":
            return bessel_kernel(self.nu, x, y)
        if self.kind == "airy":
            return airy_kernel(x, y)
        if self.kind == "laguerre_finite":
            return laguerre_kernel(self.nu, self.n, x, y)
        if self.kind == "ktilde":
            return ktilde(self.a_minus_1, self.n, x, y)
        return limiting_kernel(self.a_minus_1, x, y)

    def diagonal(self, x):
        if self.kind == "sine":
            return np.ones_like(np.asarray(x, dtype=float))
        if self.kind == "bessel":
            return bessel_density(self.nu, x)
        if self.kind == "airy":
            ai, aip, _, _ = _sp.airy(x)
            return aip**2 - np.asarray(x, dtype=float) * ai**2
        if self.kind == "laguerre_finite":
            return laguerre_kernel_diag(self.nu, self.n, x)
        if self.kind == "ktilde":
            return ktilde(self.a_minus_1, self.n, x, x)
        return limiting_kernel_diag(x)
