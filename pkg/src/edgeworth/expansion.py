"""Edgeworth approximations to the distribution of W_n.

With ``u = x / sigma`` the order-``r`` approximation is

    Psi(x) = Phi(u) + sum_{j <= r} n^{-j/2} q_j(u) phi(u)

where ``q1`` and ``q2`` are built from the cumulant coefficients b1..b4.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import erfc

from .cumulants import ExpansionCoefficients
from .errors import ConfigError

__all__ = ["EdgeworthApprox", "q1", "q2", "q1_prime", "q2_prime", "cdf", "pdf",
           "normal_cdf", "normal_pdf"]

U_CLIP = 40.0
_SQRT2 = np.sqrt(2.0)
_SQRT2PI = np.sqrt(2.0 * np.pi)


def normal_cdf(x, sigma2=1.0):
    """Phi(x / sigma) through the complementary error function."""
    if not sigma2 > 0:
        raise ConfigError("sigma2 must be positive")
    u = np.asarray(x, dtype=float) / np.sqrt(sigma2)
    out = 0.5 * erfc(-u / _SQRT2)
    return out if out.ndim else float(out)


def normal_pdf(x, sigma2=1.0):
    s = np.sqrt(sigma2)
    u = np.asarray(x, dtype=float) / s
    out = np.exp(-0.5 * u * u) / (_SQRT2PI * s)
    return out if out.ndim else float(out)


def _std(c):
    s = c.sigma
    return c.b1 / s, c.b2 / s ** 2, c.b3 / s ** 3, c.b4 / s ** 4


def q1(u, c: ExpansionCoefficients):
    """-(b1/sigma + b3/(6 sigma^3) (u^2 - 1))."""
    u = np.asarray(u, dtype=float)
    k1, _, k3, _ = _std(c)
    return -(k1 + k3 / 6.0 * (u * u - 1.0))


def q1_prime(u, c):
    u = np.asarray(u, dtype=float)
    return -(_std(c)[2] / 3.0) * u


def _q2_weights(c):
    k1, k2, k3, k4 = _std(c)
    return (0.5 * (k2 + k1 * k1), (k4 + 4.0 * k1 * k3) / 24.0, k3 * k3 / 72.0)


def q2(u, c: ExpansionCoefficients):
    """-u (w1 + w2 (u^2 - 3) + w3 (u^4 - 10 u^2 + 15)) in standardized u."""
    u = np.asarray(u, dtype=float)
    w1, w2, w3 = _q2_weights(c)
    u2 = u * u
    return -u * (w1 + w2 * (u2 - 3.0) + w3 * (u2 * u2 - 10.0 * u2 + 15.0))


def q2_prime(u, c):
    u = np.asarray(u, dtype=float)
    w1, w2, w3 = _q2_weights(c)
    u2 = u * u
    return -(w1 + w2 * (3.0 * u2 - 3.0) + w3 * (5.0 * u2 * u2 - 30.0 * u2 + 15.0))


@dataclass(frozen=True)
class EdgeworthApprox:
    """Edgeworth CDF and density of order 1 or 2 for sample size ``n``.

    ``order=0`` gives the plain N(0, sigma^2) approximation.
    """

    coeffs: ExpansionCoefficients
    n: int
    order: int = 1

    def __post_init__(self):
        if self.order not in (0, 1, 2):
            raise ConfigError(f"order must be 0, 1 or 2, got {self.order}")
        if not self.n > 0:
            raise ConfigError("n must be positive")

    def _terms(self, u):
        c, n = self.coeffs, self.n
        corr = np.zeros_like(u)
        dcorr = np.zeros_like(u)
        if self.order >= 1:
            qa = q1(u, c)
            corr += qa / np.sqrt(n)
            dcorr += (q1_prime(u, c) - u * qa) / np.sqrt(n)
        if self.order >= 2:
            qb = q2(u, c)
            corr += qb / n
            dcorr += (q2_prime(u, c) - u * qb) / n
        return corr, dcorr

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        u = x / self.coeffs.sigma
        inside = np.abs(u) <= U_CLIP
        uc = np.where(inside, u, 0.0)
        phi = np.exp(-0.5 * uc * uc) / _SQRT2PI
        corr, _ = self._terms(uc)
        val = 0.5 * erfc(-uc / _SQRT2) + corr * phi
        out = np.where(inside, val, (u > 0).astype(float))
        return out if out.ndim else float(out)

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        s = self.coeffs.sigma
        u = x / s
        inside = np.abs(u) <= U_CLIP
        uc = np.where(inside, u, 0.0)
        phi = np.exp(-0.5 * uc * uc) / _SQRT2PI
        _, dcorr = self._terms(uc)
        out = np.where(inside, (phi + dcorr * phi) / s, 0.0)
        return out if out.ndim else float(out)


def cdf(x, approx: EdgeworthApprox):
    return approx.cdf(x)


def pdf(x, approx: EdgeworthApprox):
    return approx.pdf(x)
