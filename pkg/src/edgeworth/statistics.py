"""Smooth statistics H of the sample mean and their derivatives at mu.

Built-in statistics carry analytic gradients and Hessians; third
derivatives of the correlation and Z-score statistics come from central
differences of the analytic Hessian.  Expression-defined statistics are
differentiated numerically throughout.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DegenerateStatisticError, NumericalError
from .expression import Expression, parse
from .model import StatisticSpec
from .moments import symmetrize_sorted

__all__ = [
    "DerivativeBundle", "pearson_h", "ratio_squares_h", "zscore_h",
    "pearson_bundle", "ratio_squares_bundle", "zscore_bundle", "expression_bundle",
    "statistic_function", "bundle_for", "quadratic_form",
    "pearson_derivatives", "ratio_squares_derivatives", "zscore_derivatives",
]

EPS = np.finfo(float).eps
SIGMA2_FLOOR = 1e-12


@dataclass(frozen=True, eq=False)
class DerivativeBundle:
    """Derivatives of H at mu and the limiting variance of W_n.

    Attributes
    ----------
    grad, hess, third : ndarray
        ``l_i``, ``l_ij`` and ``l_ijk``; the tensors are exactly symmetric.
    sigma2 : float
        ``sum_ij sigma_ij l_i l_j``.
    h_at_mu : float
    """

    grad: np.ndarray
    hess: np.ndarray
    third: np.ndarray
    sigma2: float
    h_at_mu: float

    @property
    def k(self):
        return self.grad.shape[0]

    def permuted(self, order):
        o = np.asarray(order)
        return DerivativeBundle(self.grad[o], self.hess[np.ix_(o, o)],
                                self.third[np.ix_(o, o, o)], self.sigma2, self.h_at_mu)


def quadratic_form(grad, sigma) -> float:
    g = np.asarray(grad, dtype=float)
    return float(g @ np.asarray(sigma, dtype=float) @ g)


def _make_bundle(h, grad, hess, third, sigma):
    grad = np.asarray(grad, dtype=float)
    sigma = np.asarray(sigma, dtype=float)
    k = grad.shape[0]
    if sigma.shape != (k, k):
        raise ConfigError(f"covariance must be {k} x {k}, got {sigma.shape}")
    sigma2 = quadratic_form(grad, sigma)
    if not np.isfinite(sigma2) or sigma2 <= SIGMA2_FLOOR:
        raise DegenerateStatisticError(
            f"limiting variance sigma^2 = {sigma2:.3g} is not positive; "
            "the expansion is undefined")
    return DerivativeBundle(grad, symmetrize_sorted(hess), symmetrize_sorted(third),
                            sigma2, float(h))


def _check_mu(mu, k, name):
    mu = np.asarray(mu, dtype=float)
    if mu.shape != (k,):
        raise ConfigError(f"{name} needs a {k}-vector mean, got shape {mu.shape}")
    return mu


def _third_from_hessian(hess_fn, mu):
    # central differences of the analytic Hessian, step eps^(1/4) * scale
    k = mu.shape[0]
    third = np.empty((k, k, k))
    for m in range(k):
        h = EPS ** 0.25 * max(1.0, abs(mu[m]))
        up, down = mu.copy(), mu.copy()
        up[m] += h
        down[m] -= h
        third[:, :, m] = (hess_fn(up) - hess_fn(down)) / (up[m] - down[m])
    # average over permutations before pinning sorted entries
    perms = list(itertools.permutations(range(3)))
    return sum(third.transpose(p) for p in perms) / len(perms)


# -- Pearson correlation ----------------------------------------------------

def pearson_h(z):
    """(z5 - z1 z2) / sqrt((z3 - z1^2)(z4 - z2^2)), vectorized over the last axis."""
    z = np.asarray(z, dtype=float)
    z1, z2, z3, z4, z5 = (z[..., i] for i in range(5))
    with np.errstate(all="ignore"):
        return (z5 - z1 * z2) / np.sqrt((z3 - z1 * z1) * (z4 - z2 * z2))


def pearson_derivatives(z):
    """Value, gradient and Hessian of the correlation statistic at ``z``."""
    z = np.asarray(z, dtype=float)
    z1, z2, z3, z4, z5 = z
    num = z5 - z1 * z2
    va, vb = z3 - z1 * z1, z4 - z2 * z2
    if not (va > 0 and vb > 0):
        raise DegenerateStatisticError("pearson needs positive variance margins at mu")
    d_num = np.array([-z2, -z1, 0.0, 0.0, 1.0])
    h_num = np.zeros((5, 5))
    h_num[0, 1] = h_num[1, 0] = -1.0
    d_a = np.array([-2 * z1, 0.0, 1.0, 0.0, 0.0])
    d_b = np.array([0.0, -2 * z2, 0.0, 1.0, 0.0])
    h_a = np.zeros((5, 5))
    h_a[0, 0] = -2.0
    h_b = np.zeros((5, 5))
    h_b[1, 1] = -2.0
    # g = (va vb)^(-1/2); grad log g = r
    g = 1.0 / np.sqrt(va * vb)
    r = -0.5 * d_a / va - 0.5 * d_b / vb
    dr = (-0.5 * (h_a / va - np.outer(d_a, d_a) / va ** 2)
          - 0.5 * (h_b / vb - np.outer(d_b, d_b) / vb ** 2))
    d_g = g * r
    h_g = g * (np.outer(r, r) + dr)
    grad = g * d_num + num * d_g
    hess = g * h_num + np.outer(d_num, d_g) + np.outer(d_g, d_num) + num * h_g
    return num * g, grad, hess


def pearson_bundle(mu, sigma) -> DerivativeBundle:
    mu = _check_mu(mu, 5, "pearson")
    h, grad, hess = pearson_derivatives(mu)
    third = _third_from_hessian(lambda z: pearson_derivatives(z)[2], mu)
    return _make_bundle(h, grad, hess, third, sigma)


# -- sum of squared ratios --------------------------------------------------

def ratio_squares_h(z):
    """sum_j (x_j / y_j)^2 with z = (x_1..x_m, y_1..y_m)."""
    z = np.asarray(z, dtype=float)
    m = z.shape[-1] // 2
    with np.errstate(all="ignore"):
        return np.sum((z[..., :m] / z[..., m:]) ** 2, axis=-1)


def ratio_squares_derivatives(z):
    """Value and analytic first, second and third derivatives."""
    z = np.asarray(z, dtype=float)
    if z.ndim != 1 or z.shape[0] % 2:
        raise ConfigError("ratio-squares needs an even-length mean vector")
    m = z.shape[0] // 2
    x, y = z[:m], z[m:]
    if np.any(y == 0):
        raise DegenerateStatisticError("ratio-squares needs nonzero denominator means")
    k = 2 * m
    grad = np.zeros(k)
    hess = np.zeros((k, k))
    third = np.zeros((k, k, k))
    for j in range(m):
        xi, yi = j, m + j
        xv, yv = x[j], y[j]
        grad[xi] = 2 * xv / yv ** 2
        grad[yi] = -2 * xv ** 2 / yv ** 3
        hess[xi, xi] = 2 / yv ** 2
        hess[xi, yi] = hess[yi, xi] = -4 * xv / yv ** 3
        hess[yi, yi] = 6 * xv ** 2 / yv ** 4
        for p in set(itertools.permutations((xi, xi, yi))):
            third[p] = -4 / yv ** 3
        for p in set(itertools.permutations((xi, yi, yi))):
            third[p] = 12 * xv / yv ** 4
        third[yi, yi, yi] = -24 * xv ** 2 / yv ** 5
    return float(np.sum((x / y) ** 2)), grad, hess, third


def ratio_squares_bundle(mu, sigma) -> DerivativeBundle:
    mu = np.asarray(mu, dtype=float)
    h, grad, hess, third = ratio_squares_derivatives(mu)
    return _make_bundle(h, grad, hess, third, sigma)


# -- two-sample Z-score on log data -----------------------------------------

def zscore_h(z, a):
    """Z-score statistic H(x1..x4) with sample-size ratio ``a``."""
    z = np.asarray(z, dtype=float)
    x1, x2, x3, x4 = (z[..., i] for i in range(4))
    s1, s2 = x2 - x1 * x1, x4 - x3 * x3
    with np.errstate(all="ignore"):
        return ((x3 - x1 - 0.5 * s1 + 0.5 * s2)
                / np.sqrt(a * s1 + s2 + 0.5 * a * s1 * s1 + 0.5 * s2 * s2))


def zscore_derivatives(z, a):
    z = np.asarray(z, dtype=float)
    x1, x2, x3, x4 = z
    s1, s2 = x2 - x1 * x1, x4 - x3 * x3
    if not (s1 > 0 and s2 > 0):
        raise DegenerateStatisticError("zscore needs positive inner variances at mu")
    d_s1 = np.array([-2 * x1, 1.0, 0.0, 0.0])
    d_s2 = np.array([0.0, 0.0, -2 * x3, 1.0])
    h_s1 = np.zeros((4, 4))
    h_s1[0, 0] = -2.0
    h_s2 = np.zeros((4, 4))
    h_s2[2, 2] = -2.0
    num = x3 - x1 - 0.5 * s1 + 0.5 * s2
    d_num = np.array([-1.0, 0.0, 1.0, 0.0]) - 0.5 * d_s1 + 0.5 * d_s2
    h_num = -0.5 * h_s1 + 0.5 * h_s2
    q = a * s1 + s2 + 0.5 * a * s1 * s1 + 0.5 * s2 * s2
    d_q = a * (1 + s1) * d_s1 + (1 + s2) * d_s2
    h_q = (a * (1 + s1) * h_s1 + a * np.outer(d_s1, d_s1)
           + (1 + s2) * h_s2 + np.outer(d_s2, d_s2))
    g = q ** -0.5
    d_g = -0.5 * g * d_q / q
    h_g = g * (0.75 * np.outer(d_q, d_q) / q ** 2 - 0.5 * h_q / q)
    grad = g * d_num + num * d_g
    hess = g * h_num + np.outer(d_num, d_g) + np.outer(d_g, d_num) + num * h_g
    return num * g, grad, hess


def zscore_bundle(a, mu, sigma) -> DerivativeBundle:
    a = float(a)
    if not a > 0:
        raise ConfigError("zscore needs a > 0")
    mu = _check_mu(mu, 4, "zscore")
    h, grad, hess = zscore_derivatives(mu, a)
    third = _third_from_hessian(lambda z: zscore_derivatives(z, a)[2], mu)
    return _make_bundle(h, grad, hess, third, sigma)


# -- arbitrary expressions --------------------------------------------------

def _fd_tensor(f, mu, order, h):
    """Composite central differences delta_i1 ... delta_ir f(mu) on sorted tuples."""
    k = mu.shape[0]
    tuples = list(itertools.combinations_with_replacement(range(k), order))
    signs = np.array(list(itertools.product((1.0, -1.0), repeat=order)))
    weights = np.prod(signs, axis=1)
    points = np.repeat(mu[None, :], len(tuples) * len(signs), axis=0)
    row = 0
    for t in tuples:
        for s in signs:
            for idx, sgn in zip(t, s):
                points[row, idx] += sgn * h[idx]
            row += 1
    values = np.asarray(f(points), dtype=float)
    if not np.all(np.isfinite(values)):
        raise NumericalError("expression is not finite in a neighborhood of mu")
    values = values.reshape(len(tuples), len(signs))
    out = np.zeros((k,) * order)
    for n, t in enumerate(tuples):
        out[t] = np.dot(weights, values[n]) / np.prod([2 * h[i] for i in t])
    return symmetrize_sorted(out)


def expression_bundle(expr, mu, sigma) -> DerivativeBundle:
    """Finite-difference derivative bundle of a parsed (or text) expression.

    Steps are ``eps^(1/3)``, ``eps^(1/4)`` and ``eps^(1/5)`` for the first,
    second and third derivatives, each scaled by ``max(1, |mu_i|)``.
    """
    mu = np.asarray(mu, dtype=float)
    if isinstance(expr, str):
        expr = parse(expr, mu.shape[0])
    if expr.min_k > mu.shape[0]:
        raise ConfigError(f"expression uses z{expr.min_k} but mu has {mu.shape[0]} entries")
    h0 = expr(mu)
    if not np.isfinite(h0):
        raise NumericalError("expression is not finite at mu")
    scale = np.maximum(1.0, np.abs(mu))
    grad = _fd_tensor(expr, mu, 1, EPS ** (1 / 3) * scale)
    hess = _fd_tensor(expr, mu, 2, EPS ** (1 / 4) * scale)
    third = _fd_tensor(expr, mu, 3, EPS ** (1 / 5) * scale)
    return _make_bundle(float(h0), grad, hess, third, sigma)


# -- dispatch ---------------------------------------------------------------

def statistic_function(spec: StatisticSpec):
    """Vectorized H for a statistic spec (rows on the last axis)."""
    if spec.kind == "pearson":
        return pearson_h
    if spec.kind == "ratio-squares":
        return ratio_squares_h
    if spec.kind == "zscore":
        a = spec.a
        return lambda z: zscore_h(z, a)
    expr = parse(spec.text, spec.model.k)
    return expr


def bundle_for(spec: StatisticSpec, mu, sigma) -> DerivativeBundle:
    if spec.kind == "pearson":
        return pearson_bundle(mu, sigma)
    if spec.kind == "ratio-squares":
        return ratio_squares_bundle(mu, sigma)
    if spec.kind == "zscore":
        return zscore_bundle(spec.a, mu, sigma)
    return expression_bundle(parse(spec.text, spec.model.k), mu, sigma)
