import numpy as np
import pytest
from scipy import stats

from edgeworth import (ChiSquare, ConfigError, EdgeworthApprox, ExpansionCoefficients,
                       StatisticSpec, VectorModel, analytic_coefficients, cdf, normal_cdf,
                       normal_pdf, pdf)
from edgeworth.expansion import q1, q1_prime, q2, q2_prime

COEFFS = [
    ExpansionCoefficients(0.0, 1.0, 8.0, 138.0, 1.0),
    ExpansionCoefficients(0.0, 1.0, 2 * np.sqrt(2), 6.0, 1.0),
    ExpansionCoefficients(0.4, -2.0, 3.0, 20.0, 2.5),
    ExpansionCoefficients(-1.2, 5.0, -4.0, -10.0, 0.3),
]


@pytest.mark.parametrize("c", COEFFS)
@pytest.mark.parametrize("order", [0, 1, 2])
@pytest.mark.parametrize("n", [20, 50, 400])
def test_density_integrates_to_one(c, order, n):
    a = EdgeworthApprox(c, n, order)
    x = np.linspace(-10 * c.sigma, 10 * c.sigma, 512)
    assert np.trapezoid(a.pdf(x), x) == pytest.approx(1.0, abs=1e-8)


@pytest.mark.parametrize("c", COEFFS)
@pytest.mark.parametrize("order", [1, 2])
def test_cdf_derivative_is_pdf(c, order):
    a = EdgeworthApprox(c, 50, order)
    x = np.linspace(-6 * c.sigma, 6 * c.sigma, 513)
    h = 1e-4 * c.sigma
    fd = (a.cdf(x + h) - a.cdf(x - h)) / (2 * h)
    np.testing.assert_allclose(fd, a.pdf(x), atol=1e-7)


def test_polynomial_derivatives():
    c = COEFFS[2]
    u = np.linspace(-4, 4, 101)
    h = 1e-5
    np.testing.assert_allclose(q1_prime(u, c), (q1(u + h, c) - q1(u - h, c)) / (2 * h),
                               atol=1e-8)
    np.testing.assert_allclose(q2_prime(u, c), (q2(u + h, c) - q2(u - h, c)) / (2 * h),
                               atol=1e-6)


@pytest.mark.parametrize("order", [0, 1, 2])
def test_tails_are_exact_after_clipping(order):
    a = EdgeworthApprox(COEFFS[0], 5, order)
    out = a.cdf(np.array([-np.inf, -1e6, 1e6, np.inf]))
    assert out.tolist() == [0.0, 0.0, 1.0, 1.0]
    assert a.pdf(np.array([-1e6, np.inf])).tolist() == [0.0, 0.0]


def test_order0_is_normal_and_module_functions():
    c = COEFFS[2]
    a = EdgeworthApprox(c, 30, 0)
    x = np.linspace(-5, 5, 11)
    np.testing.assert_allclose(cdf(x, a), normal_cdf(x, c.sigma2), rtol=1e-14)
    np.testing.assert_allclose(pdf(x, a), normal_pdf(x, c.sigma2), rtol=1e-14)
    assert normal_cdf(0.0) == 0.5


def test_first_order_formula_at_a_point():
    # Psi(x) = Phi(u) - n^-1/2 (b1/s + b3/(6 s^3)(u^2 - 1)) phi(u), u = x / s
    c = COEFFS[2]
    n, x = 40, 0.9
    s = np.sqrt(c.sigma2)
    u = x / s
    expected = stats.norm.cdf(u) - (c.b1 / s + c.b3 / (6 * s ** 3) * (u * u - 1)) \
        * stats.norm.pdf(u) / np.sqrt(n)
    assert EdgeworthApprox(c, n, 1).cdf(x) == pytest.approx(expected, rel=1e-13)


def test_second_order_gap_scales_as_inverse_n():
    c = COEFFS[0]
    x = np.linspace(-6, 6, 512)
    gaps = [n * np.max(np.abs(EdgeworthApprox(c, n, 2).cdf(x) - EdgeworthApprox(c, n, 1).cdf(x)))
            for n in (50, 100, 200, 400)]
    assert max(gaps) / min(gaps) < 1.5


def test_monotone_where_density_nonnegative():
    a = EdgeworthApprox(COEFFS[0], 10, 2)
    x = np.linspace(-8, 8, 4001)
    f, p = a.cdf(x), a.pdf(x)
    assert np.any(p < 0)  # this heavy-skew case does go negative
    ok = (p[:-1] >= 0) & (p[1:] >= 0)
    assert np.all(np.diff(f)[ok] >= -1e-15)


def test_error_rates_against_exact_distribution():
    # W = sqrt(n)(Xbar^2 - 1) for chi-square(1) data; Xbar ~ Gamma(n/2, 2/n)
    spec = StatisticSpec("expression", VectorModel((ChiSquare(1.0),), [[1]]), text="z1^2")
    c = analytic_coefficients(spec)
    errs = {}
    for n in (80, 320):
        x = np.linspace(-5, 5, 2001) * c.sigma
        exact = stats.gamma(a=n / 2, scale=2 / n).cdf(np.sqrt(np.maximum(1 + x / np.sqrt(n), 0)))
        errs[n] = [np.max(np.abs(EdgeworthApprox(c, n, o).cdf(x) - exact)) for o in (0, 1, 2)]
    assert errs[80][2] < errs[80][1] < errs[80][0]
    # expected shrink factors for n x 4: 2, 4 and 8
    assert errs[80][0] / errs[320][0] > 1.7
    assert errs[80][1] / errs[320][1] > 3.2
    assert errs[80][2] / errs[320][2] > 6.0


def test_validation():
    with pytest.raises(ConfigError):
        EdgeworthApprox(COEFFS[0], 10, 3)
    with pytest.raises(ConfigError):
        EdgeworthApprox(COEFFS[0], 0, 1)
    with pytest.raises(ConfigError):
        normal_cdf(0.0, 0.0)
