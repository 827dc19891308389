"""Bulk-spacing references and distribution/histogram comparison statistics.

The exact GUE bulk spacing is represented by the Dietz-Haake rational
(Pade) expansion; its coefficient lists are transcribed digit for digit.
The constant 1.2824271291 inside the exponential prefactor is recognisably
Glaisher's constant truncated, but it is kept exactly as printed rather than
replaced by a higher-precision value.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .quadrature import QuadratureSpec, integrate_1d

# Pade numerator/denominator of the bulk spacing: (coefficient, e) pairs for
# terms coefficient * s**(e/4).
DH_F_TERMS = (
    (28915.18572129, 17), (1086.6573434, 20), (45351.83787784, 21),
    (1772.4275928, 24), (30526.8898691, 25), (1242.5658114, 28),
    (10452.3148571, 29), (446.60040377, 32), (3018.6826326, 33),
    (125.982683, 36), (346.045278, 37), (16.21088391, 40),
    (31.04144855, 41), (1.0, 44),
)
DH_G_TERMS = (
    (1582.4460446, 0), (59.4696721, 3), (2481.97736506, 4), (96.9999314, 7),
    (-4446.44557011, 8), (-161.88357063, 11), (-9022.29390885, 12),
    (-350.52128316, 15), (23929.7407678, 16), (879.81693061, 19),
    (45324.33326465, 20), (1763.26689471, 23), (34256.40313293, 24),
    (1384.64210377, 27), (14982.65463299, 28), (625.59278179, 31),
    (4081.38643920, 32), (175.06649190, 35), (682.7954698, 36),
    (29.56032569, 39), (57.1857440, 40), (2.36447174, 43), (1.0, 44),
)
_DH_EXP_CONST = np.log(2.0) / 12.0 + 3.0 * (1.0 / 12.0 - np.log(1.2824271291))

# bulk pdf behaves like C*s^2 at the origin; integrals over [0, DH_SMALL_S)
# use this envelope analytically instead of evaluating the rational form
DH_SMALL_S = 1e-3
DH_SMALL_S_COEFF = (5.0 / 16.0) * (DH_F_TERMS[0][0] / DH_G_TERMS[0][0]) \
    * (np.pi / 2.0) ** -0.25 * np.exp(_DH_EXP_CONST)

_REF_SPEC = QuadratureSpec(abs_tol=1e-13, rel_tol=1e-13)


def wigner_surmise(s):
    """GUE Wigner surmise (32 s^2 / pi^2) exp(-4 s^2 / pi)."""
    s = np.asarray(s, dtype=float)
    out = 32.0 * s * s / np.pi**2 * np.exp(-4.0 * s * s / np.pi)
    return out if out.ndim else float(out)


def bulk_spacing_dh(s):
    """Exact GUE bulk spacing via the Dietz-Haake Pade expansion; s > 0."""
    scalar = np.ndim(s) == 0
    s = np.atleast_1d(np.asarray(s, dtype=float))
    if np.any(s <= 0):
        raise ValueError("bulk_spacing_dh is defined for s > 0")
    q = s**0.25
    f = np.zeros(s.shape)
    for c, e in DH_F_TERMS:
        f += c * q**e
    g = np.zeros(s.shape)
    for c, e in DH_G_TERMS:
        g += c * q**e
    out = (np.pi**4 / 16.0) * (f / g) \
        * (s * s - 2.0 / np.pi**2 + 5.0 / (np.pi**4 * s * s)) \
        * (np.pi * s / 2.0) ** -0.25 * np.exp(_DH_EXP_CONST - np.pi**2 * s * s / 8.0)
    return float(out[0]) if scalar else out


def bulk_norm_and_moment():
    """(norm, first moment) of the bulk expansion, small-s tail handled by
    the s^2 envelope (its contribution is ~1e-9 / ~1e-12)."""
    norm, _ = integrate_1d(bulk_spacing_dh, DH_SMALL_S, 12.0, _REF_SPEC, vectorized=True)
    norm += DH_SMALL_S_COEFF * DH_SMALL_S**3 / 3.0
    mom, _ = integrate_1d(lambda t: t * bulk_spacing_dh(t), DH_SMALL_S, 12.0,
                          _REF_SPEC, vectorized=True)
    mom += DH_SMALL_S_COEFF * DH_SMALL_S**4 / 4.0
    return norm, mom


@dataclass(frozen=True)
class TabulatedDistribution:
    """A pdf sampled on a strictly increasing grid, with cached norm,
    first moment and a clamped-monotone trapezoidal CDF."""

    grid: np.ndarray
    pdf: np.ndarray
    _cdf: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=float)
        pdf = np.asarray(self.pdf, dtype=float)
        if grid.ndim != 1 or grid.shape != pdf.shape or len(grid) < 2:
            raise ValueError("grid and pdf must be matching 1-D arrays")
        if np.any(np.diff(grid) <= 0):
            raise ValueError("grid must be strictly increasing")
        if np.any(pdf < -1e-12):
            raise ValueError("pdf must be nonnegative")
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "pdf", np.maximum(pdf, 0.0))
        seg = 0.5 * (self.pdf[1:] + self.pdf[:-1]) * np.diff(grid)
        cdf = np.concatenate([[0.0], np.cumsum(np.maximum(seg, 0.0))])
        object.__setattr__(self, "_cdf", cdf)

    @property
    def norm(self):
        return float(self._cdf[-1])

    @property
    def first_moment(self):
        return float(np.trapezoid(self.grid * self.pdf, self.grid))

    def cdf_values(self):
        return self._cdf.copy()

    def rescaled(self, factor):
        """Distribution of s/factor scaled to preserve the norm."""
        return TabulatedDistribution(self.grid / factor, self.pdf * factor)


def from_callable(fn, grid):
    grid = np.asarray(grid, dtype=float)
    return TabulatedDistribution(grid, np.asarray(fn(grid), dtype=float))


def cdf(dist, s):
    """Trapezoidal CDF of a TabulatedDistribution at s (within the grid)."""
    scalar = np.ndim(s) == 0
    s = np.atleast_1d(np.asarray(s, dtype=float))
    if np.any(s < dist.grid[0] - 1e-12) or np.any(s > dist.grid[-1] + 1e-12):
        raise ValueError("cdf evaluation outside the tabulated grid")
    out = np.interp(s, dist.grid, dist._cdf)
    out = np.clip(out, 0.0, dist.norm)
    return float(out[0]) if scalar else out


@dataclass(frozen=True)
class Histogram:
    """Binned probability masses with edges and the configuration count."""

    edges: np.ndarray
    masses: np.ndarray
    n_conf: int = 0

    def __post_init__(self):
        edges = np.asarray(self.edges, dtype=float)
        masses = np.asarray(self.masses, dtype=float)
        if len(edges) != len(masses) + 1:
            raise ValueError("need len(edges) == len(masses) + 1")
        if np.any(masses < 0):
            raise ValueError("masses must be nonnegative")
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "masses", masses)

    @property
    def centers(self):
        return 0.5 * (self.edges[1:] + self.edges[:-1])

    @property
    def widths(self):
        return np.diff(self.edges)

    @property
    def first_moment(self):
        return float(np.dot(self.centers, self.masses))

    def density(self):
        """Masses divided by bin widths (an empirical pdf)."""
        return self.masses / self.widths


def reference_bin_masses(reference, edges):
    """Integral of a reference pdf over each bin.

    reference may be a TabulatedDistribution (integrated via its CDF), a
    Histogram on identical edges (its masses are used directly), or a
    callable pdf (integrated adaptively).
    """
    edges = np.asarray(edges, dtype=float)
    if isinstance(reference, Histogram):
        if not np.array_equal(reference.edges, edges):
            raise ValueError("histogram references need identical bin edges")
        return reference.masses.copy()
    if isinstance(reference, TabulatedDistribution):
        if edges[0] < reference.grid[0] - 1e-12 or edges[-1] > reference.grid[-1] + 1e-12:
            raise ValueError("reference does not cover the histogram support")
        c = cdf(reference, edges)
        return np.diff(c)
    out = np.empty(len(edges) - 1)
    for i in range(len(out)):
        lo = max(edges[i], 1e-12)
        hi = edges[i + 1]
        if hi <= lo:
            out[i] = 0.0
            continue
        v, _ = integrate_1d(reference, lo, hi,
                            QuadratureSpec(abs_tol=1e-12, rel_tol=1e-10),
                            vectorized=True)
        out[i] = v
    return out


def chi2_distance(hist, reference, mode="mass"):
    """Distance between an empirical histogram and a reference density.

    mode="mass"    sum over bins of (mass_i - r_i)^2 with r_i the reference
                   mass of the bin (the frozen default),
    mode="pearson" the same normalised per bin by r_i,
    mode="pdf"     squared differences of bin-averaged densities
                   (mass_i/width - r_i/width)^2.

    Whether the published distances carry per-bin weights is not determinable
    from their values alone, hence the selectable variants.
    """
    r = reference_bin_masses(reference, hist.edges)
    h = hist.masses
    if mode == "mass":
        return float(np.sum((h - r) ** 2))
    if mode == "pearson":
        good = r > 0
        return float(np.sum((h[good] - r[good]) ** 2 / r[good]))
    if mode == "pdf":
        w = hist.widths
        return float(np.sum(((h - r) / w) ** 2))
    raise ValueError(f"unknown chi2 mode {mode!r}")


@dataclass(frozen=True)
class Curve:
    """A signed curve on a grid (difference curves are not densities)."""

    grid: np.ndarray
    values: np.ndarray

    def sup(self):
        return float(np.max(np.abs(self.values)))

    def argsup(self):
        return float(self.grid[int(np.argmax(np.abs(self.values)))])


def delta_curve(dist, reference, rebin=False):
    """Signed pointwise difference dist - reference on the grid of dist.

    reference may be tabulated (requires the same grid unless rebin=True,
    which interpolates it) or a callable pdf.
    """
    if isinstance(reference, TabulatedDistribution):
        if np.array_equal(reference.grid, dist.grid):
            ref = reference.pdf
        elif rebin:
            ref = np.interp(dist.grid, reference.grid, reference.pdf)
        else:
            raise ValueError("grids differ; pass rebin=True to interpolate")
    else:
        ref = np.asarray(reference(dist.grid), dtype=float)
    return Curve(dist.grid, dist.pdf - ref)
