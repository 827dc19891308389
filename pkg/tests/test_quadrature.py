import numpy as np
import pytest

from chigue.quadrature import (QuadratureError, QuadratureSpec, gauss_legendre,
                               integrate_1d, integrate_nested)

TIGHT = QuadratureSpec(abs_tol=1e-13, rel_tol=1e-13)


def test_gaussian_integral():
    val, err = integrate_1d(lambda x: np.exp(-x * x), 0, np.inf, TIGHT, vectorized=True)
    assert abs(val - np.sqrt(np.pi) / 2) < 1e-12


def test_rayleigh_norm():
    val, _ = integrate_1d(lambda x: 2 * x * np.exp(-x * x), 0, np.inf, TIGHT, vectorized=True)
    assert abs(val - 1.0) < 1e-12


def test_laguerre_orthogonality_moment():
    # degree 0 against degree 1 under the matching x^3 = x^{2*1+1} weight
    from chigue.specfun import laguerre

    f = lambda x: x**3 * np.exp(-x * x) * laguerre(1, 1, x * x)
    val, _ = integrate_1d(f, 0, np.inf, TIGHT, vectorized=True)
    assert abs(val) < 1e-10


def test_scalar_callable():
    val, _ = integrate_1d(lambda x: x * x, 0.0, 1.0, TIGHT)
    assert abs(val - 1 / 3) < 1e-13


def test_nonconvergence_carries_estimate():
    spec = QuadratureSpec(abs_tol=1e-300, rel_tol=1e-300, max_subdiv=8)
    with pytest.raises(QuadratureError) as exc:
        integrate_1d(lambda x: np.sqrt(np.abs(x)), -1, 1, spec, vectorized=True)
    assert exc.value.value is not None
    assert abs(exc.value.value - 4 / 3) < 1e-3


def test_nested_simplex_volume():
    val, _ = integrate_nested(lambda p: np.ones(p.shape[0]), 2, outer_cutoff=1.0)
    assert abs(val - 0.5) < 1e-12


def test_nested_cube_volume():
    val, _ = integrate_nested(lambda p: np.ones(p.shape[0]), 3, outer_cutoff=1.0)
    assert abs(val - 1 / 3) < 1e-10


def test_symmetric_mode_matches_product():
    # permutation-symmetric integrand over {0 <= a,b <= chi <= 1}
    f = lambda p: np.exp(-p[:, 0] * p[:, 1]) * p[:, 2]
    v1, _ = integrate_nested(f, 3, outer_cutoff=1.0, symmetric=False)
    v2, _ = integrate_nested(f, 3, outer_cutoff=1.0, symmetric=True)
    assert abs(v1 - v2) < 1e-10


def test_gaussian_tail_truncation():
    f = lambda p: np.exp(-(p[:, 0] + 1.0) ** 2) * 2 * (p[:, 0] + 1.0)
    val, _ = integrate_nested(f, 1)
    assert abs(val - np.exp(-1.0)) < 1e-10


def test_deterministic():
    f = lambda x: np.sin(3 * x) ** 2 * np.exp(-x)
    a = integrate_1d(f, 0, 30.0, vectorized=True)
    b = integrate_1d(f, 0, 30.0, vectorized=True)
    assert a == b


def test_error_estimates_conservative():
    # 20 analytically known integrals; the reported error should bound the
    # true error in at least 95% of cases
    cases = []
    for m in range(1, 11):
        cases.append((lambda x, m=m: x**m, 1.0 / (m + 1)))
    for a in (0.5, 1.0, 2.0, 3.0):
        cases.append((lambda x, a=a: np.exp(-a * x), (1 - np.exp(-a)) / a))
    for w in (1.0, 3.0, 7.0):
        cases.append((lambda x, w=w: np.cos(w * x), np.sin(w) / w))
    cases.append((lambda x: 1 / (1 + x * x), np.arctan(1.0)))
    cases.append((lambda x: np.sqrt(x), 2 / 3))
    cases.append((lambda x: np.log1p(x), 2 * np.log(2) - 1))
    assert len(cases) == 20
    ok = 0
    for f, truth in cases:
        val, err = integrate_1d(f, 0.0, 1.0, QuadratureSpec(abs_tol=1e-12, rel_tol=1e-12),
                                vectorized=True)
        if abs(val - truth) <= max(err, 5e-16):
            ok += 1
    assert ok >= 19


def test_spec_validation():
    with pytest.raises(ValueError):
        QuadratureSpec(abs_tol=0.0)
    with pytest.raises(ValueError):
        QuadratureSpec(max_subdiv=0)


def test_gauss_legendre_affine():
    x, w = gauss_legendre(12, 2.0, 5.0)
    assert abs(np.dot(w, x**2) - (125 - 8) / 3) < 1e-12
