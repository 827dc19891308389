import numpy as np
import pytest

from chigue.kernels import (KernelEval, airy_kernel, bessel_density, bessel_kernel,
                            ktilde, laguerre_kernel, laguerre_kernel_diag,
                            laguerre_kernel_sum, limiting_kernel,
                            limiting_kernel_diag, limiting_kernel_quadrature,
                            sine_kernel)
from chigue.specfun import bessel_j
from chigue.unfold import UnfoldMap


class TestSine:
    def test_diagonal_is_one(self):
        assert sine_kernel(0.37, 0.37) == 1.0

    def test_integer_zero(self):
        assert abs(sine_kernel(0.0, 1.0)) < 1e-15

    def test_half(self):
        assert sine_kernel(0.0, 0.5) == pytest.approx(2 / np.pi, rel=1e-14)


class TestBessel:
    def test_origin_vanishes(self):
        for nu in (0, 1, 3):
            assert bessel_kernel(nu, 0.0, 0.0) == 0.0

    def test_large_diagonal_limit(self):
        assert bessel_kernel(0, 100.0, 100.0) == pytest.approx(1 / np.pi, abs=5e-3)

    def test_off_diagonal_against_raw(self):
        x, y = 3.0, 5.0
        nu = 1
        direct = (np.sqrt(x * y)
                  * (y * bessel_j(nu, x) * bessel_j(nu - 1, y)
                     - x * bessel_j(nu, y) * bessel_j(nu - 1, x)) / (x**2 - y**2))
        assert bessel_kernel(nu, x, y) == pytest.approx(direct, rel=1e-13)

    def test_symmetry(self):
        rng = np.random.default_rng(3)
        for _ in range(30):
            nu = int(rng.integers(0, 4))
            x, y = rng.uniform(0.1, 30.0, 2)
            assert bessel_kernel(nu, x, y) == pytest.approx(
                bessel_kernel(nu, y, x), rel=1e-12)

    def test_near_diagonal_continuity(self):
        v0 = bessel_kernel(1, 5.0, 5.0)
        v1 = bessel_kernel(1, 5.0, 5.0 + 4e-6)
        v2 = bessel_kernel(1, 5.0, 5.0 + 2e-5)
        assert v1 == pytest.approx(v0, rel=1e-5)
        assert v2 == pytest.approx(v0, rel=1e-4)

    def test_bulk_limit_rate(self):
        # the locally unfolded kernel approaches the sine kernel at a rate
        # of at least 1/x0
        deltas = np.linspace(-2, 2, 81)
        sups = []
        xs = [20.0, 50.0, 100.0, 200.0]
        for x0 in xs:
            vals = []
            for d in deltas:
                xb = x0 + np.pi * d
                unf = bessel_kernel(0, x0, xb) / np.sqrt(
                    bessel_density(0, x0) * bessel_density(0, xb))
                vals.append(abs(unf - sine_kernel(0.0, d)))
            sups.append(max(vals))
        slope = np.polyfit(np.log(xs), np.log(sups), 1)[0]
        assert -slope >= 1.0
        assert all(s <= 1.0 / x for s, x in zip(sups, xs))

    def test_centre_of_mass_average_kills_leading_correction(self):
        # averaging the unfolded 2-point function over one oscillation period
        # of the base point leaves 1 - sinc^2 up to o(1/x0)
        d = 0.6
        resid = []
        for x0 in (40.0, 80.0, 160.0):
            m = UnfoldMap(0)
            bases = np.linspace(x0, x0 + np.pi, 160, endpoint=False)
            acc = 0.0
            for b in bases:
                xb = b + np.pi * d
                unf = bessel_kernel(0, b, xb) / np.sqrt(
                    bessel_density(0, b) * bessel_density(0, xb))
                acc += 1 - unf**2
            acc /= len(bases)
            resid.append(abs(acc - (1 - sine_kernel(0.0, d) ** 2)) * x0)
        assert resid[2] < resid[0]
        assert resid[2] < 0.05


class TestAiry:
    def test_symmetry(self):
        assert airy_kernel(0.3, -1.2) == pytest.approx(airy_kernel(-1.2, 0.3), rel=1e-13)

    def test_deep_decay(self):
        assert abs(airy_kernel(10.0, 10.0)) < 1e-8

    def test_sine_form_asymptotics(self):
        # oscillatory regime against the two-term cosine/sine form
        x = 30.0
        for dy in (0.1, -0.1):
            y = x + dy
            zeta = 2 / 3 * x**1.5
            eta = 2 / 3 * y**1.5
            approx = (1 / (2 * np.pi * (x - y))) * (
                ((y / x) ** 0.25 + (x / y) ** 0.25) * np.sin(zeta - eta)
                + ((y / x) ** 0.25 - (x / y) ** 0.25) * np.cos(zeta + eta))
            assert airy_kernel(-x, -y) == pytest.approx(approx, abs=2.0 / zeta)


class TestLaguerreKernel:
    def test_sum_equals_christoffel_darboux(self):
        rng = np.random.default_rng(5)
        for n in (1, 2, 5, 10):
            for _ in range(5):
                nu = int(rng.integers(0, 4))
                u, v = rng.uniform(-8.0, 4.0, 2)
                assert laguerre_kernel(nu, n, u, v) == pytest.approx(
                    laguerre_kernel_sum(nu, n, u, v), rel=1e-10)

    def test_single_term(self):
        assert laguerre_kernel(0, 1, 0.4, 1.7) == pytest.approx(2.0, rel=1e-14)

    def test_diagonal_against_finite_difference(self):
        for nu, n, u in ((0, 6, 1.3), (2, 9, -2.0), (1, 4, 0.5)):
            h = 1e-4 * max(1.0, abs(u))
            fd = laguerre_kernel(nu, n, u + h, u - h)
            assert laguerre_kernel_diag(nu, n, u) == pytest.approx(fd, rel=1e-6)

    def test_equivalent_kernels_leave_determinant_invariant(self):
        rng = np.random.default_rng(9)
        nu, n = 1, 6
        for _ in range(5):
            x = rng.uniform(0.2, 3.0, 3)
            u = x**2
            base = np.array([[laguerre_kernel(nu, n, a, b) for b in u] for a in u])
            g = rng.uniform(0.5, 2.0, 3)
            scaled = base * g[:, None] / g[None, :]
            assert np.linalg.det(scaled) == pytest.approx(np.linalg.det(base), rel=1e-10)


class TestKtilde:
    def test_reduces_to_plain_kernel(self):
        for n in (3, 6, 12):
            u, v = 0.7, 0.2
            assert ktilde(0, n, u, v) == pytest.approx(
                laguerre_kernel(2, n - 1, -u, -v), rel=1e-13)

    def test_single_term_hand_expansion(self):
        # n = 2 leaves only j = 0; collecting the factorial ratios gives
        # (1/a) u^{1-a} L_{a-1}^{(3-a)}(-u) L_0^{(2)}(-v), and L_0 = 1
        from chigue.specfun import laguerre

        for a in (2, 3):
            u, v = 0.9, 0.4
            expect = (1.0 / a) * u ** (1 - a) * laguerre(a - 1, 3 - a, -u)
            assert ktilde(a - 1, 2, u, v) == pytest.approx(expect, rel=1e-12)

    def test_row_pole_cancels_in_determinant(self):
        # at a = 2 individual entries diverge like 1/u as u -> 0 but the
        # two-row determinant stays finite
        n = 6
        v1, v2 = 0.8, 0.3
        dets = []
        for u in (1e-2, 1e-3, 1e-4):
            row1 = [laguerre_kernel(2, n - 1, -u, -v1), laguerre_kernel(2, n - 1, -u, -v2)]
            row2 = [ktilde(1, n, u, v1), ktilde(1, n, u, v2)]
            dets.append(np.linalg.det(np.array([row1, row2])))
        assert abs(dets[1] - dets[2]) < 1e-3 * max(1.0, abs(dets[2]))


class TestLimitingKernel:
    def test_diagonal_closed_form(self):
        lam = 1.3
        from scipy.special import iv

        expect = 2 / lam**4 * (iv(2, 2 * lam) ** 2 - iv(3, 2 * lam) * iv(1, 2 * lam))
        assert limiting_kernel(0, lam, lam) == pytest.approx(expect, rel=1e-13)

    def test_quadrature_matches_closed_form(self):
        for x in (0.5, 1.0, 3.0):
            for y in (0.5, 1.0, 3.0):
                q = limiting_kernel_quadrature(0, x, y)
                c = limiting_kernel(0, x, y)
                assert q == pytest.approx(c, rel=1e-9)

    def test_large_n_limit_of_ktilde(self):
        # n^3-scaled modified kernel at arguments x^2/n approaches the
        # limiting kernel (empirically a clean 1/n rate)
        n = 4000
        for a_minus_1 in (0, 1):
            for (x, y) in ((0.9, 1.7), (2.0, 0.6)):
                lim = limiting_kernel(a_minus_1, x, y)
                fin = ktilde(a_minus_1, n, x * x / n, y * y / n) / n**3
                assert fin == pytest.approx(lim, rel=1e-3)

    def test_symmetry_of_k0(self):
        assert limiting_kernel(0, 0.7, 2.2) == pytest.approx(
            limiting_kernel(0, 2.2, 0.7), rel=1e-12)


class TestKernelEval:
    def test_dispatch_matches_functions(self):
        assert KernelEval("sine")(0.1, 0.4) == sine_kernel(0.1, 0.4)
        assert KernelEval("bessel", nu=2)(1.0, 2.0) == bessel_kernel(2, 1.0, 2.0)
        assert KernelEval("laguerre_finite", nu=1, n=4)(0.5, 0.8) == \
            laguerre_kernel(1, 4, 0.5, 0.8)
        assert KernelEval("limiting")(1.0, 1.0) == pytest.approx(
            limiting_kernel_diag(1.0), rel=1e-14)

    def test_rejects_unknown_kind(self):
        with pytest.raises(ValueError):
            KernelEval("fredholm")

    def test_diagonal_never_uses_quotient(self):
        k = KernelEval("airy")
        x = 0.8
        ai_diag = k.diagonal(x)
        assert ai_diag == pytest.approx(k(x, x), rel=1e-12)
