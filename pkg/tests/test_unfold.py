import numpy as np
import pytest

from chigue.quadrature import QuadratureSpec, integrate_1d
from chigue.unfold import (UnfoldMap, finite_n_density, unfolded_airy_density,
                           unfolded_bessel_density)


class TestUnfoldMap:
    def test_nu_zero_is_linear(self):
        m = UnfoldMap(0)
        assert m.g(3.0) == pytest.approx(3.0 / np.pi, rel=1e-15)
        assert m.inverse(2.0) == pytest.approx(2.0 * np.pi, rel=1e-15)
        assert m.jacobian(2.0) == pytest.approx(np.pi, rel=1e-15)

    def test_vanishes_at_nu(self):
        for nu in (1, 5, 20):
            assert UnfoldMap(nu).g(float(nu)) == 0.0

    def test_strictly_increasing(self):
        for nu in (0, 1, 7, 50):
            m = UnfoldMap(nu)
            x = np.linspace(1e-3, 10 * nu + 50, 1000)
            assert np.all(np.diff(m.g(x)) > 0)

    def test_lower_branch_negative(self):
        # the sub-edge branch carries the reflected (negative) sign
        m = UnfoldMap(5)
        assert m.g(2.0) < 0

    def test_roundtrip(self):
        for nu in (1, 5, 20):
            m = UnfoldMap(nu)
            for lam in (0.1, 1.0, 10.0, -0.4):
                assert m.g(m.inverse(lam)) == pytest.approx(lam, abs=1e-12)

    def test_inverse_of_g_is_identity(self):
        for nu in (0, 3, 20):
            m = UnfoldMap(nu)
            x = np.linspace(0.05, 10 * nu + 50, 40)
            back = m.inverse(m.g(x))
            assert np.max(np.abs(back - x) / x) < 1e-10

    def test_edge_exponent_three_halves(self):
        nu = 8
        m = UnfoldMap(nu)
        r = np.geomspace(1e-4, 1e-2, 25)
        lam = m.g(nu * (1 + r))
        slope = np.polyfit(np.log(r), np.log(lam), 1)[0]
        assert slope == pytest.approx(1.5, abs=0.01)

    def test_rejects_nonpositive(self):
        with pytest.raises(ValueError):
            UnfoldMap(2).g(0.0)

    def test_jacobian_matches_derivative(self):
        m = UnfoldMap(4)
        for lam in (-1.0, 0.5, 3.0):
            x = m.inverse(lam)
            h = 1e-6
            dgdx = (m.g(x + h) - m.g(x - h)) / (2 * h)
            assert m.jacobian(lam) == pytest.approx(1 / dgdx, rel=1e-5)


class TestUnfoldedDensities:
    def test_bessel_tends_to_one(self):
        for nu in (0, 1, 5):
            assert unfolded_bessel_density(nu, 20.0) == pytest.approx(1.0, abs=1e-2)

    def test_bessel_nu0_closed_form(self):
        from chigue.kernels import bessel_density

        lam = 1.7
        assert unfolded_bessel_density(0, lam) == pytest.approx(
            np.pi * bessel_density(0, np.pi * lam), rel=1e-12)

    def test_airy_tends_to_one(self):
        assert unfolded_airy_density(20.0) == pytest.approx(1.0, abs=1e-2)

    def test_airy_origin_marker(self):
        assert unfolded_airy_density(0.0) == np.inf

    def test_airy_reflected_branch_finite(self):
        v = unfolded_airy_density(-2.0)
        assert np.isfinite(v) and v >= 0

    def test_airy_counts_eigenvalues(self):
        # gap midpoints sit at the integers for a picket fence at j + 1/2,
        # so the cumulative count at integer m is m
        for m in (3, 4, 6):
            val, _ = integrate_1d(unfolded_airy_density, 1e-9, float(m),
                                  QuadratureSpec(abs_tol=1e-9, rel_tol=1e-8),
                                  vectorized=True)
            assert val == pytest.approx(m, abs=0.05)

    def test_linear_growth_of_counts(self):
        for nu in (0, 2):
            for lim in (5.0, 15.0, 30.0):
                val, _ = integrate_1d(lambda t: unfolded_bessel_density(nu, t),
                                      1e-6, lim,
                                      QuadratureSpec(abs_tol=1e-8, rel_tol=1e-7),
                                      vectorized=True)
                assert val / lim == pytest.approx(1.0, abs=0.02)

    def test_bessel_approaches_airy(self):
        lam = np.linspace(1.0, 6.0, 60)
        airy = np.array([unfolded_airy_density(l) for l in lam])
        sups = []
        for nu in (5, 10, 20, 40):
            bes = unfolded_bessel_density(nu, lam)
            sups.append(np.max(np.abs(bes - airy)))
        assert sups == sorted(sups, reverse=True)


class TestFiniteDensity:
    def test_normalised_to_n(self):
        for nu, n in ((0, 2), (1, 3), (2, 5)):
            val, _ = integrate_1d(lambda x: finite_n_density(nu, n, x), 0, np.inf,
                                  QuadratureSpec(abs_tol=1e-11, rel_tol=1e-10),
                                  vectorized=True)
            assert val == pytest.approx(n, abs=1e-8)

    def test_vanishes_at_origin(self):
        for nu in (0, 1, 3):
            assert finite_n_density(nu, 4, 0.0) == 0.0

    def test_single_eigenvalue_case(self):
        x = np.linspace(0.1, 3.0, 7)
        assert finite_n_density(0, 1, x) == pytest.approx(2 * x * np.exp(-x * x), rel=1e-13)
