import numpy as np
import pytest

from edgeworth import (ChiSquare, ConfigError, DegenerateStatisticError, NumericalError,
                       Poisson, StatisticSpec, VectorModel, bundle_for, correlation_model,
                       covariance_matrix, mean_vector, parse, statistic_function,
                       zscore_model)
from edgeworth.statistics import (expression_bundle, pearson_bundle, pearson_derivatives,
                                  pearson_h, quadratic_form, ratio_squares_bundle,
                                  ratio_squares_derivatives, ratio_squares_h, zscore_bundle,
                                  zscore_derivatives, zscore_h)

PEARSON_TEXT = "(z5 - z1*z2) / (sqrt(z3 - z1^2) * sqrt(z4 - z2^2))"
EXP1_MU = np.array([1.0, 1, 3, 3, 1])
EXP1_SIGMA = covariance_matrix(correlation_model(ChiSquare(1), ChiSquare(1)))
RATIO_MU = np.array([1.0, 3, 1, 1])
ZSCORE_MU = np.array([0.0, 1, 0, 1])


def richardson_grad(f, x, h=1e-3):
    """Fourth-order central differences, an independent route to the gradient."""
    g = np.empty_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h
        g[i] = (-f(x + 2 * e) + 8 * f(x + e) - 8 * f(x - e) + f(x - 2 * e)) / (12 * h)
    return g


def richardson_jac(fvec, x, h=1e-3):
    cols = []
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h
        cols.append((-fvec(x + 2 * e) + 8 * fvec(x + e) - 8 * fvec(x - e)
                     + fvec(x - 2 * e)) / (12 * h))
    return np.stack(cols, axis=-1)


def test_pearson_examples():
    d = pearson_bundle(EXP1_MU, EXP1_SIGMA)
    np.testing.assert_allclose(d.grad, [-0.5, -0.5, 0, 0, 0.5], atol=1e-15)
    assert d.sigma2 == pytest.approx(1.0, abs=1e-12)
    assert d.h_at_mu == 0.0


def test_ratio_examples():
    h, grad, _, _ = ratio_squares_derivatives(np.array([1.0, 1.0]))
    assert h == 1.0 and grad.tolist() == [2.0, -2.0]
    _, grad, _, _ = ratio_squares_derivatives(np.array([0.0, 0.0, 1.0, 1.0]))
    assert np.all(grad == 0)
    m = VectorModel((ChiSquare(1), Poisson(1), Poisson(1)),
                    [[1, 0, 0], [2, 0, 0], [0, 1, 0], [0, 0, 1]])
    d = ratio_squares_bundle(RATIO_MU, covariance_matrix(m))
    assert d.h_at_mu == 10.0
    np.testing.assert_allclose(d.grad, [2, 6, -2, -18])
    assert d.sigma2 == pytest.approx(4080.0, rel=1e-14)


def test_zscore_examples():
    _, grad, _ = zscore_derivatives(ZSCORE_MU, 1.0)
    np.testing.assert_allclose(grad, np.array([-1, -0.5, 1, 0.5]) / np.sqrt(3), rtol=1e-14)
    d = zscore_bundle(0.25, ZSCORE_MU, np.diag([1.0, 2, 1, 2]))
    assert d.sigma2 == pytest.approx(1.6, rel=1e-12)
    z = np.array([0.3, 1.2, -0.1, 0.8])
    assert zscore_h(z[[2, 3, 0, 1]], 1.0) == pytest.approx(-zscore_h(z, 1.0), rel=1e-14)


@pytest.mark.parametrize("name", ["pearson", "ratio", "zscore"])
def test_analytic_derivatives_match_high_order_differences(name):
    if name == "pearson":
        mu = np.array([1.2, 0.7, 3.1, 2.0, 1.1])
        f, derivs = pearson_h, lambda z: pearson_derivatives(z)
    elif name == "ratio":
        mu = np.array([1.0, 3.0, 1.4, 0.9])
        f, derivs = ratio_squares_h, lambda z: ratio_squares_derivatives(z)[:3]
    else:
        mu = np.array([0.2, 1.3, -0.4, 1.1])
        f, derivs = (lambda z: zscore_h(z, 0.25)), (lambda z: zscore_derivatives(z, 0.25))
    _, grad, hess = derivs(mu)
    np.testing.assert_allclose(grad, richardson_grad(f, mu), rtol=1e-8, atol=1e-10)
    fd_hess = richardson_jac(lambda z: derivs(z)[1], mu)
    np.testing.assert_allclose(hess, fd_hess, rtol=1e-7, atol=1e-9)


@pytest.mark.parametrize("name", ["pearson", "ratio", "zscore"])
def test_third_derivatives_against_hessian_differences(name):
    if name == "pearson":
        mu, sig = EXP1_MU + 0.1, np.eye(5)
        d = pearson_bundle(mu, sig)
        hess = lambda z: pearson_derivatives(z)[2]
    elif name == "ratio":
        mu, sig = RATIO_MU, np.eye(4)
        d = ratio_squares_bundle(mu, sig)
        hess = lambda z: ratio_squares_derivatives(z)[2]
    else:
        mu, sig = ZSCORE_MU + 0.05, np.eye(4)
        d = zscore_bundle(0.25, mu, sig)
        hess = lambda z: zscore_derivatives(z, 0.25)[2]
    fd = richardson_jac(hess, mu, h=1e-3)
    np.testing.assert_allclose(d.third, fd, rtol=1e-6, atol=1e-8)


def test_bundle_tensors_are_symmetric(exp2, ratio, zscore):
    for spec in (exp2, ratio, zscore):
        m = spec.model
        d = bundle_for(spec, mean_vector(m), covariance_matrix(m))
        np.testing.assert_array_equal(d.hess, d.hess.T)
        for p in [(1, 0, 2), (2, 1, 0), (0, 2, 1), (1, 2, 0), (2, 0, 1)]:
            np.testing.assert_array_equal(d.third, d.third.transpose(p))


def test_sigma2_double_loop_agrees(exp2):
    m = exp2.model
    sig = covariance_matrix(m)
    d = bundle_for(exp2, mean_vector(m), sig)
    loop = sum(d.grad[i] * sig[i, j] * d.grad[j] for i in range(5) for j in range(5))
    assert d.sigma2 == pytest.approx(loop, rel=1e-12)


def test_expression_reproduces_pearson_bundle():
    e = expression_bundle(PEARSON_TEXT, EXP1_MU, EXP1_SIGMA)
    a = pearson_bundle(EXP1_MU, EXP1_SIGMA)
    np.testing.assert_allclose(e.grad, a.grad, atol=1e-6)
    np.testing.assert_allclose(e.hess, a.hess, atol=1e-4)
    np.testing.assert_allclose(e.third, a.third, atol=5e-3)


def test_expression_simple_cases():
    d = expression_bundle(parse("z1"), np.array([3.0, 4.0]), np.eye(2))
    np.testing.assert_allclose(d.grad, [1, 0], atol=1e-9)
    np.testing.assert_allclose(d.hess, 0, atol=1e-6)
    d = expression_bundle("z2 - z1*z1", np.array([1.0, 3.0]), np.eye(2))
    np.testing.assert_allclose(d.grad, [-2, 1], rtol=1e-8)
    np.testing.assert_allclose(d.hess, [[-2, 0], [0, 0]], atol=1e-5)


def test_expression_errors():
    with pytest.raises(DegenerateStatisticError):
        expression_bundle("z1 - z1", np.array([1.0]), np.eye(1))
    with pytest.raises(NumericalError):
        expression_bundle("log(z1)", np.array([0.0]), np.eye(1))
    with pytest.raises(ConfigError):
        expression_bundle("z3", np.array([1.0, 1.0]), np.eye(2))


def test_degenerate_builtins():
    with pytest.raises(DegenerateStatisticError):
        pearson_bundle(np.array([1.0, 1, 1, 3, 1]), np.eye(5))
    with pytest.raises(DegenerateStatisticError):
        ratio_squares_bundle(np.array([1.0, 0.0]), np.eye(2))
    with pytest.raises(ConfigError):
        pearson_bundle(np.ones(4), np.eye(4))


def test_permuting_coordinates_preserves_sigma2(exp1):
    m = exp1.model
    mu, sig = mean_vector(m), covariance_matrix(m)
    d = bundle_for(exp1, mu, sig)
    order = [4, 2, 0, 3, 1]
    p = d.permuted(order)
    assert quadratic_form(p.grad, sig[np.ix_(order, order)]) == pytest.approx(d.sigma2,
                                                                              rel=1e-14)


def test_statistic_function_dispatch(exp1, zscore):
    z = np.array([[1.0, 1, 3, 3, 1], [1.0, 1, 3, 3, 2]])
    np.testing.assert_allclose(statistic_function(exp1)(z), [0.0, 0.5])
    spec = StatisticSpec("expression", exp1.model, text=PEARSON_TEXT)
    np.testing.assert_allclose(statistic_function(spec)(z), [0.0, 0.5])
    assert statistic_function(zscore)(np.array([0.0, 1, 0, 1])) == 0.0
    m = zscore_model()
    assert bundle_for(zscore, mean_vector(m), covariance_matrix(m)).sigma2 == \
        pytest.approx(1.6, rel=1e-12)
