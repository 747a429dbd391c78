"""Generative models for the random vector Z.

A :class:`VectorModel` combines mutually independent base variables
``w_1, ..., w_b`` with an integer exponent matrix; coordinate ``i`` of ``Z``
is the monomial ``prod_b w_b ** exponents[i, b]``.  Because the bases are
independent, every mixed raw moment of ``Z`` factorizes into a product of
univariate raw moments, which is what keeps the analytic pipeline exact.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import ConfigError, UnsupportedDegreeError

__all__ = [
    "BaseDistribution", "ChiSquare", "Poisson", "Normal", "LogNormal",
    "VectorModel", "StatisticSpec", "STATISTIC_KINDS",
    "mean_vector", "covariance_matrix", "base_from_dict",
    "correlation_model", "ratio_model", "zscore_model",
]

DEFAULT_MAX_DEGREE = 12


class BaseDistribution:
    """Univariate base distribution with closed-form raw moments."""

    kind: str = ""
    #: True when the support is contained in [0, inf)
    nonnegative: bool = False
    discrete: bool = False

    def raw_moment(self, p: int) -> float:
        if p < 0:
            raise ValueError("moment order must be non-negative")
        return self._raw_moments(p + 1)[p]

    def _raw_moments(self, count):
        raise NotImplementedError

    def sample(self, rng: np.random.Generator, size):
        raise NotImplementedError

    def params(self) -> dict:
        raise NotImplementedError

    def to_dict(self) -> dict:
        return {"kind": self.kind, **self.params()}


def _positive(name, value):
    value = float(value)
    if not math.isfinite(value) or value <= 0:
        raise ConfigError(f"{name} must be a positive finite number, got {value!r}")
    return value


def _finite(name, value):
    value = float(value)
    if not math.isfinite(value):
        raise ConfigError(f"{name} must be finite, got {value!r}")
    return value


@dataclass(frozen=True)
class ChiSquare(BaseDistribution):
    df: float = 1.0
    kind = "chi-square"
    nonnegative = True

    def __post_init__(self):
        object.__setattr__(self, "df", _positive("df", self.df))

    @lru_cache(maxsize=None)
    def _raw_moments(self, count):
        # E X^p = 2^p Gamma(df/2 + p) / Gamma(df/2) = prod_{j<p} (df + 2j)
        out = [1.0]
        for j in range(count - 1):
            out.append(out[-1] * (self.df + 2 * j))
        return tuple(out)

    def sample(self, rng, size):
        return rng.chisquare(self.df, size)

    def params(self):
        return {"df": self.df}


@dataclass(frozen=True)
class Poisson(BaseDistribution):
    lam: float = 1.0
    kind = "poisson"
    nonnegative = True
    discrete = True

    def __post_init__(self):
        object.__setattr__(self, "lam", _positive("lambda", self.lam))

    @lru_cache(maxsize=None)
    def _raw_moments(self, count):
        # Touchard recursion m_{p+1} = lam * sum_j C(p, j) m_j
        m = [1.0]
        for p in range(count - 1):
            m.append(self.lam * sum(math.comb(p, j) * m[j] for j in range(p + 1)))
        return tuple(m)

    def sample(self, rng, size):
        return rng.poisson(self.lam, size).astype(float)

    def params(self):
        return {"lambda": self.lam}


@dataclass(frozen=True)
class Normal(BaseDistribution):
    mean: float = 0.0
    variance: float = 1.0
    kind = "normal"

    def __post_init__(self):
        object.__setattr__(self, "mean", _finite("mean", self.mean))
        object.__setattr__(self, "variance", _positive("variance", self.variance))

    @lru_cache(maxsize=None)
    def _raw_moments(self, count):
        # central moments vanish for odd orders, (j-1)!! v^{j/2} for even j
        central = [1.0]
        for j in range(1, count):
            central.append(0.0 if j % 2 else central[j - 2] * (j - 1) * self.variance)
        out = []
        for p in range(count):
            out.append(sum(math.comb(p, j) * self.mean ** (p - j) * central[j]
                           for j in range(0, p + 1, 2)))
        return tuple(out)

    def sample(self, rng, size):
        return rng.normal(self.mean, math.sqrt(self.variance), size)

    def params(self):
        return {"mean": self.mean, "variance": self.variance}


@dataclass(frozen=True)
class LogNormal(BaseDistribution):
    log_mean: float = 0.0
    log_variance: float = 1.0
    kind = "lognormal"
    nonnegative = True

    def __post_init__(self):
        object.__setattr__(self, "log_mean", _finite("log-mean", self.log_mean))
        object.__setattr__(self, "log_variance",
                           _positive("log-variance", self.log_variance))

    @lru_cache(maxsize=None)
    def _raw_moments(self, count):
        return tuple(math.exp(p * self.log_mean + 0.5 * p * p * self.log_variance)
                     for p in range(count))

    def sample(self, rng, size):
        return rng.lognormal(self.log_mean, math.sqrt(self.log_variance), size)

    def params(self):
        return {"log-mean": self.log_mean, "log-variance": self.log_variance}


_BASE_KEYS = {
    "chi-square": (ChiSquare, {"df": "df"}),
    "poisson": (Poisson, {"lambda": "lam"}),
    "normal": (Normal, {"mean": "mean", "variance": "variance"}),
    "lognormal": (LogNormal, {"log-mean": "log_mean", "log-variance": "log_variance"}),
}


def base_from_dict(record: dict) -> BaseDistribution:
    """Build a base distribution from its tagged JSON record."""
    if not isinstance(record, dict) or "kind" not in record:
        raise ConfigError("base record must be an object with a 'kind' key")
    kind = record["kind"]
    if kind not in _BASE_KEYS:
        raise ConfigError(f"unknown base kind {kind!r}; expected one of {sorted(_BASE_KEYS)}")
    cls, keys = _BASE_KEYS[kind]
    extra = set(record) - set(keys) - {"kind"}
    if extra:
        raise ConfigError(f"unknown key {sorted(extra)[0]!r} in {kind} base record")
    missing = set(keys) - set(record)
    if missing:
        raise ConfigError(f"missing key {sorted(missing)[0]!r} in {kind} base record")
    return cls(**{attr: record[key] for key, attr in keys.items()})


@dataclass(frozen=True, eq=False)
class VectorModel:
    """Independent bases plus a monomial coordinate map.

    Parameters
    ----------
    bases : sequence of BaseDistribution
        Mutually independent base variables.
    exponents : array_like of int, shape (k, b)
        ``Z_i = prod_b w_b ** exponents[i, b]``.
    max_degree : int
        Ceiling on the order of any base raw moment the model may be asked for.
    """

    bases: tuple
    exponents: np.ndarray
    max_degree: int = DEFAULT_MAX_DEGREE
    names: tuple = field(default=None)

    def __post_init__(self):
        bases = tuple(self.bases)
        for b in bases:
            if not isinstance(b, BaseDistribution):
                raise ConfigError(f"not a base distribution: {b!r}")
        exps = np.asarray(self.exponents)
        if exps.ndim != 2 or exps.shape[1] != len(bases) or exps.shape[0] == 0:
            raise ConfigError(
                f"map must be a k x {len(bases)} integer matrix, got shape {exps.shape}")
        if not np.all(np.equal(np.mod(exps, 1), 0)) or np.any(exps < 0):
            raise ConfigError("map entries must be non-negative integers")
        exps = exps.astype(np.int64)
        exps.setflags(write=False)
        if np.any(exps.sum(axis=1) == 0):
            raise ConfigError("every map row needs at least one nonzero exponent")
        if int(self.max_degree) < 1:
            raise ConfigError("max_degree must be positive")
        if exps.shape[0] > 16:
            raise ConfigError("at most 16 coordinates are supported")
        names = self.names
        if names is None:
            names = tuple(f"z{i + 1}" for i in range(exps.shape[0]))
        object.__setattr__(self, "bases", bases)
        object.__setattr__(self, "exponents", exps)
        object.__setattr__(self, "max_degree", int(self.max_degree))
        object.__setattr__(self, "names", tuple(names))

    @property
    def k(self) -> int:
        return self.exponents.shape[0]

    def __eq__(self, other):
        if not isinstance(other, VectorModel):
            return NotImplemented
        return (self.bases == other.bases and self.max_degree == other.max_degree
                and np.array_equal(self.exponents, other.exponents))

    def __hash__(self):
        return hash((self.bases, self.exponents.tobytes(), self.max_degree))

    def raw_moment(self, base_exponents) -> float:
        """E prod_b w_b ** e_b for a vector of per-base exponents."""
        total = 1.0
        for base, e in zip(self.bases, base_exponents):
            e = int(e)
            if e > self.max_degree:
                raise UnsupportedDegreeError(
                    f"raw moment of order {e} of {base.kind} base exceeds the "
                    f"configured ceiling {self.max_degree}")
            if e:
                total *= base.raw_moment(e)
        return total

    def product_moment(self, coords) -> float:
        """E prod_{i in coords} Z_i (coords may repeat)."""
        e = np.zeros(len(self.bases), dtype=np.int64)
        for i in coords:
            e = e + self.exponents[i]
        return self.raw_moment(e)

    def sample_bases(self, rng, size):
        """Draw base variables; returns an array of shape ``size + (b,)``."""
        if isinstance(size, int):
            size = (size,)
        return np.stack([b.sample(rng, size) for b in self.bases], axis=-1)

    def coordinates(self, w):
        """Map base draws (..., b) to Z (..., k)."""
        w = np.asarray(w, dtype=float)
        out = np.ones(w.shape[:-1] + (self.k,))
        for i, row in enumerate(self.exponents):
            for b, e in enumerate(row):
                if e:
                    out[..., i] *= w[..., b] if e == 1 else w[..., b] ** int(e)
        return out

    def sample(self, rng, size):
        return self.coordinates(self.sample_bases(rng, size))

    def permuted(self, order):
        """Model with coordinates reordered so new coordinate j is old ``order[j]``."""
        order = list(order)
        if sorted(order) != list(range(self.k)):
            raise ConfigError("order must be a permutation of the coordinates")
        return VectorModel(self.bases, self.exponents[order], self.max_degree,
                           tuple(self.names[i] for i in order))

    def to_dict(self) -> dict:
        return {"bases": [b.to_dict() for b in self.bases],
                "map": self.exponents.tolist(),
                "max_degree": self.max_degree}

    @classmethod
    def from_dict(cls, record: dict) -> "VectorModel":
        if not isinstance(record, dict):
            raise ConfigError("model must be an object")
        extra = set(record) - {"bases", "map", "max_degree"}
        if extra:
            raise ConfigError(f"unknown key {sorted(extra)[0]!r} in model record")
        for key in ("bases", "map"):
            if key not in record:
                raise ConfigError(f"missing key {key!r} in model record")
        if not isinstance(record["bases"], list) or not record["bases"]:
            raise ConfigError("'bases' must be a non-empty list")
        bases = tuple(base_from_dict(b) for b in record["bases"])
        try:
            exps = np.array(record["map"], dtype=float)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"'map' is not an integer matrix: {exc}") from None
        return cls(bases, exps, record.get("max_degree", DEFAULT_MAX_DEGREE))


def mean_vector(model: VectorModel) -> np.ndarray:
    """Mean of Z: component i is the product of base raw moments of ``exponents[i]``."""
    return np.array([model.raw_moment(row) for row in model.exponents])


def covariance_matrix(model: VectorModel) -> np.ndarray:
    """Cov(Z_i, Z_j) = E Z_i Z_j - mu_i mu_j, via exponent addition."""
    mu = mean_vector(model)
    k = model.k
    cov = np.empty((k, k))
    for i in range(k):
        for j in range(i, k):
            cov[i, j] = cov[j, i] = (
                model.raw_moment(model.exponents[i] + model.exponents[j]) - mu[i] * mu[j])
    return cov


STATISTIC_KINDS = ("pearson", "ratio-squares", "zscore", "expression")


@dataclass(frozen=True)
class StatisticSpec:
    """Which H to apply to the sample mean of a model.

    ``kind`` is one of ``pearson``, ``ratio-squares``, ``zscore`` (uses ``a``)
    or ``expression`` (uses ``text``, a formula over ``z1..zk``).
    """

    kind: str
    model: VectorModel
    a: float = None
    text: str = None

    def __post_init__(self):
        kind, model = self.kind, self.model
        if kind not in STATISTIC_KINDS:
            raise ConfigError(f"unknown statistic kind {kind!r}; expected one of {STATISTIC_KINDS}")
        if not isinstance(model, VectorModel):
            raise ConfigError("statistic needs a VectorModel")
        E = model.exponents
        if kind == "pearson":
            if model.k != 5:
                raise ConfigError("pearson needs k = 5 coordinates (X, Y, X^2, Y^2, XY)")
            if not (np.array_equal(E[2], 2 * E[0]) and np.array_equal(E[3], 2 * E[1])
                    and np.array_equal(E[4], E[0] + E[1])):
                raise ConfigError("pearson needs the coordinate ordering (X, Y, X^2, Y^2, XY)")
        elif kind == "ratio-squares":
            if model.k % 2:
                raise ConfigError("ratio-squares needs an even number of coordinates")
        elif kind == "zscore":
            if model.k != 4:
                raise ConfigError("zscore needs k = 4 coordinates (log X, log^2 X, log Y, log^2 Y)")
            if not (np.array_equal(E[1], 2 * E[0]) and np.array_equal(E[3], 2 * E[2])):
                raise ConfigError("zscore needs the coordinate ordering "
                                  "(log X, log^2 X, log Y, log^2 Y)")
            if self.a is None or not float(self.a) > 0:
                raise ConfigError("zscore needs a positive sample-size ratio 'a'")
            object.__setattr__(self, "a", float(self.a))
        elif kind == "expression":
            if not isinstance(self.text, str) or not self.text.strip():
                raise ConfigError("expression statistic needs a non-empty 'text'")
        if kind != "zscore" and self.a is not None:
            raise ConfigError(f"'a' is only valid for zscore, not {kind}")
        if kind != "expression" and self.text is not None:
            raise ConfigError(f"'text' is only valid for expression, not {kind}")

    def to_dict(self) -> dict:
        out = {"kind": self.kind}
        if self.a is not None:
            out["a"] = self.a
        if self.text is not None:
            out["text"] = self.text
        return out

    @classmethod
    def from_dict(cls, record: dict, model: VectorModel) -> "StatisticSpec":
        if not isinstance(record, dict) or "kind" not in record:
            raise ConfigError("statistic must be an object with a 'kind' key")
        allowed = {"kind", "a", "text"}
        extra = set(record) - allowed
        if extra:
            raise ConfigError(f"unknown key {sorted(extra)[0]!r} in statistic record")
        return cls(record["kind"], model, record.get("a"), record.get("text"))


def correlation_model(x: BaseDistribution, y: BaseDistribution, **kw) -> VectorModel:
    """Z = (X, Y, X^2, Y^2, XY) for independent X and Y."""
    return VectorModel((x, y), [[1, 0], [0, 1], [2, 0], [0, 2], [1, 1]], **kw)


def ratio_model(x: BaseDistribution, *denominators: BaseDistribution, **kw) -> VectorModel:
    """Z = (X, X^2, Y_1, Y_2): the two-ratio layout with numerators X and X^2.

    With a single ``x`` and two denominator bases this is the ratio-of-means
    experiment; numerators are the first two powers of ``x``.
    """
    if len(denominators) != 2:
        raise ConfigError("ratio_model expects exactly two denominator bases")
    return VectorModel((x,) + denominators,
                       [[1, 0, 0], [2, 0, 0], [0, 1, 0], [0, 0, 1]], **kw)


def zscore_model(log_x: BaseDistribution = None, log_y: BaseDistribution = None, **kw):
    """Z = (U, U^2, V, V^2) with U, V the log-data (normal bases by default)."""
    log_x = Normal(0.0, 1.0) if log_x is None else log_x
    log_y = Normal(0.0, 1.0) if log_y is None else log_y
    return VectorModel((log_x, log_y), [[1, 0], [2, 0], [0, 1], [0, 2]], **kw)
