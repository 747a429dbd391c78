"""Numerical diagnostics for partial Cramer-type smoothness conditions.

``estimate_modulus`` estimates ``E |E[exp(i <t, Z_{1..a}>) | Z_{a+1..k}]|`` on
shells of growing radius by nested Monte Carlo.  ``jacobian_check`` probes
the determinant criterion for vectors of the form ``(w, K_1(w), ...)``, and
``truncation_bound`` checks the characteristic-function bound for the
vector truncated at radius ``sqrt(n)``.

None of this proves a limsup; the reports summarize evidence.
"""
from __future__ import annotations

import itertools
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, NumericalError, UnsupportedConditioningError
from .expression import parse
from .model import BaseDistribution, VectorModel

__all__ = ["GpccQuery", "GpccReport", "estimate_modulus", "JacobianResult",
           "jacobian_check", "TruncationBound", "truncation_bound", "abs_moment",
           "rng_stream"]

EPS = np.finfo(float).eps


def rng_stream(seed, *key):
    """Independent generator for ``seed`` and an integer spawn key."""
    return np.random.Generator(np.random.PCG64(
        np.random.SeedSequence(int(seed), spawn_key=tuple(int(x) for x in key))))


@dataclass(frozen=True, eq=False)
class GpccQuery:
    model: VectorModel
    a: int
    shells: tuple
    directions_per_shell: int = 64
    mc_draws: int = 500

    def __post_init__(self):
        if not isinstance(self.model, VectorModel):
            raise ConfigError("GPCC query needs a VectorModel")
        if not (isinstance(self.a, (int, np.integer)) and 1 <= self.a <= self.model.k):
            raise ConfigError(f"split index a must be in 1..{self.model.k}, got {self.a!r}")
        shells = tuple(float(r) for r in self.shells)
        if not shells:
            raise ConfigError("at least one shell radius is required")
        if any(r < 0 for r in shells) or any(b <= a for a, b in zip(shells, shells[1:])):
            raise ConfigError("shell radii must be non-negative and strictly increasing")
        if int(self.directions_per_shell) < 1 or int(self.mc_draws) < 2:
            raise ConfigError("directions_per_shell must be >= 1 and mc_draws >= 2")
        object.__setattr__(self, "shells", shells)
        object.__setattr__(self, "a", int(self.a))
        object.__setattr__(self, "directions_per_shell", int(self.directions_per_shell))
        object.__setattr__(self, "mc_draws", int(self.mc_draws))

    def to_dict(self):
        return {"model": self.model.to_dict(), "a": self.a, "shells": list(self.shells),
                "directions_per_shell": self.directions_per_shell,
                "mc_draws": self.mc_draws}


@dataclass
class GpccReport:
    """Per-shell aggregates of the estimated conditional CF modulus."""

    shells: list
    max_estimate: list
    max_se: list
    mean_estimate: list
    mean_se: list
    verdict: str
    estimates: list = field(default_factory=list, repr=False)
    standard_errors: list = field(default_factory=list, repr=False)
    directions: list = field(default_factory=list, repr=False)

    def to_json(self):
        return {"shells": self.shells, "max_estimate": self.max_estimate,
                "max_se": self.max_se, "mean_estimate": self.mean_estimate,
                "mean_se": self.mean_se, "verdict": self.verdict,
                "estimates": self.estimates, "standard_errors": self.standard_errors,
                "directions": self.directions}


def _conditioning_bases(model, a):
    cond_rows = model.exponents[a:]
    used = sorted({b for row in cond_rows for b in np.flatnonzero(row)})
    for b in used:
        base = model.bases[b]
        recoverable = False
        for row in cond_rows:
            nz = np.flatnonzero(row)
            if len(nz) == 1 and nz[0] == b and (row[b] % 2 == 1 or base.nonnegative):
                recoverable = True
                break
        if not recoverable:
            raise UnsupportedConditioningError(
                f"unsupported conditioning structure: coordinates {a + 1}..{model.k} "
                f"do not determine base variable {b + 1} ({base.kind})")
    return used


def _directions(rng, a, count):
    if a == 1:
        # the unit sphere in one dimension is {-1, +1}
        return np.where(np.arange(count) % 2 == 0, 1.0, -1.0)[:, None]
    g = rng.standard_normal((count, a))
    return g / np.linalg.norm(g, axis=1, keepdims=True)


def _modulus_at(model, a, cond, t, m, rng):
    nb = len(model.bases)
    free = [b for b in range(nb) if b not in cond]
    w = np.empty((m, m, nb))
    for b in cond:
        # one conditioning draw per outer row, shared by its inner draws
        w[:, :, b] = model.bases[b].sample(rng, m)[:, None]
    for b in free:
        w[:, :, b] = model.bases[b].sample(rng, (m, m))
    z = model.coordinates(w)[..., :a]
    phase = z @ t
    inner = np.abs(np.mean(np.exp(1j * phase), axis=1))
    return float(inner.mean()), float(inner.std(ddof=1) / np.sqrt(m))


def estimate_modulus(q: GpccQuery, seed: int = 0, threads: int = 1) -> GpccReport:
    """Estimate ``E |v_a(t)|`` on each shell of ``q``.

    Every (shell, direction) pair draws from its own stream derived from
    ``seed``, so the report does not depend on ``threads``.

    Raises
    ------
    UnsupportedConditioningError
        When coordinates ``a+1..k`` do not pin down the base variables they
        are built from (e.g. conditioning on ``Y^2`` for a normal ``Y``).
    """
    model, a, m = q.model, q.a, q.mc_draws
    cond = _conditioning_bases(model, a)
    jobs = []
    dirs_by_shell = []
    for si, r in enumerate(q.shells):
        dirs = _directions(rng_stream(seed, 0, si), a, q.directions_per_shell)
        dirs_by_shell.append(dirs)
        for di, d in enumerate(dirs):
            jobs.append((si, di, r * d))

    def run(job):
        si, di, t = job
        return _modulus_at(model, a, cond, t, m, rng_stream(seed, 1, si, di))

    with ThreadPoolExecutor(max_workers=max(1, int(threads))) as pool:
        results = list(pool.map(run, jobs))

    nd = q.directions_per_shell
    est = np.array([r[0] for r in results]).reshape(len(q.shells), nd)
    se = np.array([r[1] for r in results]).reshape(len(q.shells), nd)
    best = est.argmax(axis=1)
    rows = np.arange(len(q.shells))
    max_est, max_se = est[rows, best], se[rows, best]
    mean_est = est.mean(axis=1)
    mean_se = np.sqrt((se ** 2).sum(axis=1)) / nd

    if max_est[-1] < 1.0 - 5.0 * max_se[-1]:
        verdict = "decaying"
    elif np.any(est[-2:] >= 1.0 - 2.0 * se[-2:]):
        verdict = "non-decaying"
    else:
        verdict = "inconclusive"
    return GpccReport(list(q.shells), max_est.tolist(), max_se.tolist(),
                      mean_est.tolist(), mean_se.tolist(), verdict,
                      est.tolist(), se.tolist(), [d.tolist() for d in dirs_by_shell])


# -- determinant criterion ----------------------------------------------------

@dataclass(frozen=True)
class JacobianResult:
    fraction_singular: float
    singular: int
    nonfinite: int
    trials: int


def _derivative(f, x):
    # five-point stencil; exact for polynomials up to degree 4 up to round-off
    h = EPS ** 0.2 * np.maximum(1.0, np.abs(x))
    with np.errstate(all="ignore"):
        return (f(x - 2 * h) - 8 * f(x - h) + 8 * f(x + h) - f(x + 2 * h)) / (12 * h)


def _as_callable(fn):
    if isinstance(fn, str):
        expr = parse(fn, 1)
        return lambda x: expr(np.asarray(x, dtype=float)[..., None])
    return fn


def jacobian_check(maps, base: BaseDistribution, trials: int = 10000, seed: int = 0,
                   tol: float = 1e-10) -> JacobianResult:
    """Fraction of draws where the determinant criterion is (numerically) violated.

    Each trial draws ``k = len(maps) + 1`` i.i.d. points from ``base`` and
    forms the matrix whose first row is all ones and whose row ``j + 1`` holds
    ``K_j'`` at those points.  A trial counts as singular when
    ``|det| < tol * prod(row norms)``.

    ``maps`` entries are vectorized callables or formula strings in ``z1``.
    """
    maps = [_as_callable(f) for f in maps]
    if not maps:
        raise ConfigError("need at least one coordinate function")
    trials = int(trials)
    if trials < 1:
        raise ConfigError("trials must be positive")
    k = len(maps) + 1
    w = base.sample(rng_stream(seed, 2), (trials, k)).astype(float)
    mat = np.ones((trials, k, k))
    for j, f in enumerate(maps):
        mat[:, j + 1, :] = _derivative(f, w)
    finite = np.all(np.isfinite(mat), axis=(1, 2))
    det = np.zeros(trials)
    det[finite] = np.linalg.det(mat[finite])
    scale = np.prod(np.linalg.norm(np.where(np.isfinite(mat), mat, 0.0), axis=2), axis=1)
    singular = finite & (np.abs(det) < tol * scale)
    valid = int(finite.sum())
    frac = float(singular.sum()) / valid if valid else float("nan")
    return JacobianResult(frac, int(singular.sum()), trials - valid, trials)


# -- truncation bound ---------------------------------------------------------

def abs_moment(model: VectorModel, s: int, draws: int = 200000, seed: int = 0):
    """E ||Z||^s; exact for even ``s``, Monte Carlo (value, se) otherwise.

    Returns ``(value, standard_error)``; the error is 0 for the exact case.
    """
    s = int(s)
    if s < 1:
        raise ConfigError("moment order must be positive")
    k = model.k
    if s % 2 == 0:
        half = s // 2
        total = 0.0
        # multinomial expansion of (sum_i Z_i^2)^(s/2)
        for combo in itertools.combinations_with_replacement(range(k), half):
            counts = np.bincount(combo, minlength=k)
            e = (2 * counts) @ model.exponents
            total += _multinomial(counts) * model.raw_moment(e)
        return float(total), 0.0
    z = model.sample(rng_stream(seed, 3), draws)
    vals = np.linalg.norm(z, axis=1) ** s
    return float(vals.mean()), float(vals.std(ddof=1) / np.sqrt(draws))


def _multinomial(counts):
    from math import factorial
    out = factorial(int(sum(counts)))
    for c in counts:
        out //= factorial(int(c))
    return out


@dataclass(frozen=True)
class TruncationBound:
    slack: float
    rho_s: float
    v_abs: float
    g_abs: float
    se: float
    holds: bool


def truncation_bound(model: VectorModel, s: int, n: int, t, draws: int = 200000,
                     seed: int = 0) -> TruncationBound:
    """Compare the CF of Z with that of Z truncated at ``||Z|| <= sqrt(n)``.

    The additive slack is ``2 rho_s / n^(s/2)`` with ``rho_s = E ||Z||^s``; the
    check passes when ``|g(t)| <= |v(t)| + slack + 3 se``.
    """
    s, n = int(s), int(n)
    if s < 3:
        raise ConfigError("s must be at least 3")
    if n < 1:
        raise ConfigError("n must be positive")
    t = np.asarray(t, dtype=float)
    if t.shape != (model.k,):
        raise ConfigError(f"t must have length {model.k}")
    rho, _ = abs_moment(model, s, draws, seed)
    if not np.isfinite(rho):
        raise NumericalError(f"E||Z||^{s} is not finite")
    slack = 2.0 * rho / n ** (s / 2.0)
    z = model.sample(rng_stream(seed, 4), draws)
    keep = np.linalg.norm(z, axis=1) <= np.sqrt(n)
    ev = np.exp(1j * (z @ t))
    eg = np.exp(1j * ((z * keep[:, None]) @ t))
    v, g = ev.mean(), eg.mean()
    se = float(np.sqrt((np.mean(np.abs(ev - v) ** 2) + np.mean(np.abs(eg - g) ** 2)) / draws))
    holds = abs(g) <= abs(v) + slack + 3.0 * se
    return TruncationBound(float(slack), float(rho), float(abs(v)), float(abs(g)), se,
                           bool(holds))
