"""Approximate cumulants of the Taylor-expanded statistic.

With ``Zt = sqrt(n) (Zbar - mu)`` and ``W' = l.Zt + n^-1/2 (1/2) Zt'L2 Zt
+ n^-1 (1/6) L3[Zt, Zt, Zt]``, the first four cumulants are

    k1 = n^-1/2 b1,  k2 = sigma^2 + n^-1 b2,  k3 = n^-1/2 b3,  k4 = n^-1 b4

up to higher-order terms.  The ``u*`` functions are the symmetrized
products of central moments (sums over index pairings) from which the
moments of W' are assembled.
"""
from __future__ import annotations

import itertools
import string
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .moments import MomentTensor
from .statistics import DerivativeBundle

__all__ = ["ExpansionCoefficients", "coefficients", "u1", "u2", "u3", "u4", "u5",
           "U1_TERMS", "U2_TERMS", "U3_TERMS", "U4_TERMS", "U5_TERMS",
           "wprime_moments"]


def _splits(n, first):
    """Ways to cut positions 0..n-1 into a block of size ``first`` and the rest."""
    out = []
    for block in itertools.combinations(range(n), first):
        rest = tuple(i for i in range(n) if i not in block)
        out.append((block, rest))
    return out


def _matchings(items):
    if not items:
        return [()]
    head, rest = items[0], items[1:]
    out = []
    for j, partner in enumerate(rest):
        for m in _matchings(rest[:j] + rest[j + 1:]):
            out.append(((head, partner),) + m)
    return out


# Each term is a tuple of index-position blocks whose moments are multiplied.
U1_TERMS = tuple(_matchings((0, 1, 2, 3)))                       # 3 terms
U2_TERMS = tuple(_splits(5, 2))                                  # 10: pair x triple
U3_TERMS = tuple(_matchings((0, 1, 2, 3, 4, 5)))                 # 15 terms
U4_TERMS = tuple(_splits(6, 2))                                  # 15: pair x quadruple
U5_TERMS = tuple(s for s in _splits(6, 3) if 0 in s[0])          # 10: triple x triple


def _u(t, idx, terms, expected):
    if len(idx) != expected:
        raise ConfigError(f"expected {expected} indices, got {len(idx)}")
    for i in idx:
        if not 0 <= i < t.k:
            raise IndexError(f"index {i} out of range for k = {t.k}")
    total = 0.0
    for term in terms:
        prod = 1.0
        for block in term:
            prod *= t[tuple(idx[p] for p in block)]
        total += prod
    return total


def u1(t: MomentTensor, *idx) -> float:
    """mu_12 mu_34 + mu_13 mu_24 + mu_23 mu_14 (0-based coordinate indices)."""
    return _u(t, idx, U1_TERMS, 4)


def u2(t: MomentTensor, *idx) -> float:
    """Ten products of one second and one third central moment over 5 indices."""
    return _u(t, idx, U2_TERMS, 5)


def u3(t: MomentTensor, *idx) -> float:
    """Fifteen triple products of second moments over 6 indices."""
    return _u(t, idx, U3_TERMS, 6)


def u4(t: MomentTensor, *idx) -> float:
    """Fifteen second-times-fourth moment products over 6 indices."""
    return _u(t, idx, U4_TERMS, 6)


def u5(t: MomentTensor, *idx) -> float:
    """Ten third-times-third moment products over 6 indices."""
    return _u(t, idx, U5_TERMS, 6)


def _contract(factors, terms, t):
    """sum over all indices of prod(factors) * U, U given as a pairing term list.

    ``factors`` is a list of (tensor, positions) pairs; positions index the
    summation variables ``i_1..i_r`` shared with the U-term blocks.
    """
    letters = string.ascii_lowercase
    moments = {2: t.order2, 3: t.order3, 4: t.order4}
    head_ops, head_subs = [], []
    for tensor, positions in factors:
        head_ops.append(tensor)
        head_subs.append("".join(letters[p] for p in positions))
    total = 0.0
    for term in terms:
        ops = head_ops + [moments[len(b)] for b in term]
        subs = head_subs + ["".join(letters[p] for p in b) for b in term]
        total += np.einsum(",".join(subs) + "->", *ops, optimize=True)
    return float(total)


def wprime_moments(d: DerivativeBundle, t: MomentTensor):
    """Leading coefficients of the raw moments of W'.

    Returns ``(m1, m2, m3, m4)`` where E W' = n^-1/2 m1, E W'^2 = s2 + n^-1 m2,
    E W'^3 = n^-1/2 m3 and E W'^4 = 3 s2^2 + n^-1 m4, with ``s2 = l' Sigma l``.
    """
    l, L2, L3 = d.grad, d.hess, d.third
    S, M3, M4 = t.order2, t.order3, t.order4
    m1 = 0.5 * np.einsum("ij,ij->", L2, S)
    m2 = (np.einsum("a,bc,abc->", l, L2, M3)
          + 0.25 * _contract([(L2, (0, 1)), (L2, (2, 3))], U1_TERMS, t)
          + _contract([(l, (0,)), (L3, (1, 2, 3))], U1_TERMS, t) / 3.0)
    m3 = (np.einsum("a,b,c,abc->", l, l, l, M3)
          + 1.5 * _contract([(l, (0,)), (l, (1,)), (L2, (2, 3))], U1_TERMS, t))
    lin4 = [(l, (0,)), (l, (1,)), (l, (2,)), (l, (3,))]
    # E Zt^4 = U1 + n^-1 (mu_4 - U1) exactly for a normalized i.i.d. sum
    m4 = (np.einsum("a,b,c,d,abcd->", l, l, l, l, M4) - _contract(lin4, U1_TERMS, t)
          + 2.0 * _contract([(l, (0,)), (l, (1,)), (l, (2,)), (L2, (3, 4))], U2_TERMS, t)
          + 2.0 / 3.0 * _contract([(l, (0,)), (l, (1,)), (l, (2,)), (L3, (3, 4, 5))],
                                  U3_TERMS, t)
          + 1.5 * _contract([(l, (0,)), (l, (1,)), (L2, (2, 3)), (L2, (4, 5))], U3_TERMS, t))
    return float(m1), float(m2), float(m3), float(m4)


@dataclass(frozen=True)
class ExpansionCoefficients:
    """Cumulant coefficients b1..b4 and the limiting variance.

    ``a1`` and ``a2`` (the first-order polynomial's coefficients) equal ``b1``
    and ``b3``.
    """

    b1: float
    b2: float
    b3: float
    b4: float
    sigma2: float

    def __post_init__(self):
        vals = (self.b1, self.b2, self.b3, self.b4, self.sigma2)
        if not all(np.isfinite(v) for v in vals):
            raise ConfigError(f"non-finite expansion coefficient in {vals}")
        if not self.sigma2 > 0:
            raise ConfigError("sigma2 must be positive")

    @property
    def a1(self):
        return self.b1

    @property
    def a2(self):
        return self.b3

    @property
    def sigma(self):
        return float(np.sqrt(self.sigma2))

    def cumulants(self, n):
        """Approximate cumulants (k1, k2, k3, k4) of W_n."""
        return (self.b1 / np.sqrt(n), self.sigma2 + self.b2 / n,
                self.b3 / np.sqrt(n), self.b4 / n)

    def to_dict(self):
        return {"b1": self.b1, "b2": self.b2, "b3": self.b3, "b4": self.b4,
                "sigma2": self.sigma2}

    @classmethod
    def from_dict(cls, record):
        return cls(*(float(record[key]) for key in ("b1", "b2", "b3", "b4", "sigma2")))


def coefficients(d: DerivativeBundle, t: MomentTensor) -> ExpansionCoefficients:
    """b1..b4 of W_n from derivatives of H at mu and central moments of Z.

    Moments of W' are summed over all index tuples (pairing sums evaluated by
    tensor contraction) and converted to cumulants, keeping terms through
    order n^-1.
    """
    if d.k != t.k:
        raise ConfigError(f"derivative bundle has k = {d.k} but moments have k = {t.k}")
    s2 = float(d.grad @ t.order2 @ d.grad)
    m1, m2, m3, m4 = wprime_moments(d, t)
    b1 = m1
    b2 = m2 - b1 * b1
    b3 = m3 - 3.0 * s2 * b1
    b4 = m4 - 4.0 * b1 * m3 - 6.0 * s2 * m2 + 12.0 * s2 * b1 * b1
    return ExpansionCoefficients(b1, b2, b3, b4, d.sigma2)
