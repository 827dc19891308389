"""Stable evaluation of the special functions the spacing formulas need.

Generalised Laguerre polynomials are evaluated by a cancellation-free
positive-term series at non-positive argument (low degree) and by the upward
three-term recurrence otherwise.  Negative integer parameters -m are reduced
to positive ones through

    L_j^{(-m)}(z) = (-z)^m * (j-m)!/j! * L_{j-m}^{(m)}(z),   j >= m,

which is exactly the truncated series obtained when 1/Gamma(nu+l+1) kills the
first m terms.  Bessel and Airy functions are delegated to scipy.special
(AMOS), with the modified Bessel function carried in exponentially scaled
form so that arguments of order 10^3 stay finite.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import special as _sp

_SERIES_MAX_DEGREE = 60

_LOG_FACT_TABLE = tuple(math.log(math.factorial(n)) for n in range(21))


def log_factorial(n):
    """ln(n!); table-exact for n <= 20, lgamma beyond."""
    if n < 0 or n != int(n):
        raise ValueError(f"log_factorial needs a nonnegative integer, got {n!r}")
    n = int(n)
    if n <= 20:
        return _LOG_FACT_TABLE[n]
    return math.lgamma(n + 1.0)


def log_ratio_factorials(numerators, denominators):
    """ln( prod(n_i!) / prod(d_j!) ) without forming the factorials."""
    return sum(log_factorial(n) for n in numerators) - sum(
        log_factorial(d) for d in denominators
    )


def _laguerre_series(j, nu, z):
    # positive-term series for z <= 0, nu > -1; term ratio
    # t_{l+1}/t_l = (-z)(j-l) / ((l+1)(nu+l+1))
    z = np.asarray(z, dtype=float)
    term = np.full(z.shape, math.exp(math.lgamma(j + nu + 1.0) - math.lgamma(j + 1.0)
                                     - math.lgamma(nu + 1.0)))
    total = term.copy()
    for l in range(j):
        term = term * (-z) * (j - l) / ((l + 1.0) * (nu + l + 1.0))
        total += term
    return total


def _laguerre_recurrence(j, nu, z):
    z = np.asarray(z, dtype=float)
    prev = np.ones(z.shape)
    if j == 0:
        return prev
    cur = nu + 1.0 - z
    for i in range(1, j):
        prev, cur = cur, ((2 * i + 1 + nu - z) * cur - (i + nu) * prev) / (i + 1.0)
    return cur


def laguerre(j, nu, z):
    """Generalised Laguerre polynomial L_j^{(nu)}(z).

    j is a nonnegative integer; nu may be a negative integer (then j+nu >= 0
    is required and the defining series truncates from below).  Accepts
    scalar or array z.
    """
    if j < 0 or j != int(j):
        raise ValueError(f"degree must be a nonnegative integer, got {j!r}")
    j = int(j)
    scalar = np.isscalar(z)
    z = np.asarray(z, dtype=float)
    if float(nu) == int(nu) and int(nu) < 0:
        m = -int(nu)
        if j - m < 0:
            raise ValueError(
                f"L_{j}^{{({int(nu)})}} is identically ambiguous (j + nu < 0); refusing"
            )
        out = (-z) ** m * math.exp(log_ratio_factorials([j - m], [j])) \
            * laguerre(j - m, m, z)
    elif j <= _SERIES_MAX_DEGREE and np.all(z <= 0.0):
        out = _laguerre_series(j, float(nu), z)
    else:
        out = _laguerre_recurrence(j, float(nu), z)
    return float(out) if scalar else out


def laguerre_family(jmax, nu, z):
    """All of L_0^{(nu)}(z), ..., L_jmax^{(nu)}(z) in one recurrence sweep.

    Returns an array of shape (jmax+1,) + shape(z).  For negative integer nu
    the rows with j + nu < 0 are the analytic continuation in nu; they agree
    with the truncated series wherever that is defined (j + nu >= 0), which
    is the only place callers may use them.
    """
    if jmax < 0:
        raise ValueError("jmax must be >= 0")
    z = np.atleast_1d(np.asarray(z, dtype=float))
    nu = float(nu)
    out = np.empty((jmax + 1,) + z.shape)
    out[0] = 1.0
    if jmax >= 1:
        out[1] = nu + 1.0 - z
    for i in range(1, jmax):
        out[i + 1] = ((2 * i + 1 + nu - z) * out[i] - (i + nu) * out[i - 1]) / (i + 1.0)
    return out


def bessel_j(nu, x):
    """Bessel function of the first kind J_nu(x), x >= 0."""
    if np.any(np.asarray(x) < 0):
        raise ValueError("bessel_j is restricted to x >= 0")
    return _sp.jv(nu, x)


def bessel_i(nu, x):
    """Modified Bessel function I_nu(x); overflows for x beyond ~700."""
    if np.any(np.asarray(x) < 0):
        raise ValueError("bessel_i is restricted to x >= 0")
    return _sp.iv(nu, x)


def bessel_i_log(nu, x):
    """(log|I_nu(x)|, sign); finite for all x >= 0 where I_nu overflows.

    Uses the exponentially scaled ive: log I_nu(x) = log ive(nu, x) + x.
    sign is 0.0 at an exact zero (x = 0, nu > 0).
    """
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise ValueError("bessel_i_log is restricted to x >= 0")
    scaled = _sp.ive(nu, x)
    with np.errstate(divide="ignore"):
        logmag = np.log(np.abs(scaled)) + x
    sign = np.sign(scaled)
    if np.isscalar(nu) and x.ndim == 0:
        return float(logmag), float(sign)
    return logmag, sign


def airy(x):
    """(Ai(x), Ai'(x))."""
    ai, aip, _, _ = _sp.airy(x)
    return ai, aip
