"""Monte Carlo simulation of W_n and distance to its approximations.

Replications are generated in fixed-size chunks.  Chunk ``c`` draws from its
own stream derived from ``(seed, c)``, and chunks are concatenated in index
order, so a report depends only on the configuration and never on the number
of worker threads.
"""
from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .cumulants import ExpansionCoefficients, coefficients
from .errors import ConfigError, InsufficientDataError, SimulationError
from .expansion import EdgeworthApprox
from .gpcc import rng_stream
from .model import StatisticSpec, VectorModel, covariance_matrix, mean_vector
from .moments import analytic_moments, sample_moments
from .statistics import bundle_for, statistic_function

__all__ = ["CoeffSource", "GridSpec", "ExperimentConfig", "SimulationReport",
           "simulate", "estimate_coefficients", "coefficients_from_sample",
           "analytic_coefficients", "ks_distance", "empirical_cumulants"]

DROP_CEILING = 0.01
DEFAULT_POINTS = 512
HIST_BINS = 100
# cap on doubles materialized per chunk (draws x n x width)
_CHUNK_BUDGET = 1 << 22
_MAX_CHUNK = 2000

_STREAM_REPS = 0
_STREAM_COEFF = 1


@dataclass(frozen=True)
class CoeffSource:
    """``analytic`` or ``estimated`` from ``n_coeff`` sampled rows."""

    kind: str = "analytic"
    n_coeff: int = None

    def __post_init__(self):
        if self.kind == "analytic":
            if self.n_coeff is not None:
                raise ConfigError("'n_coeff' is only valid for estimated coefficients")
        elif self.kind == "estimated":
            if not isinstance(self.n_coeff, (int, np.integer)) or self.n_coeff < 100:
                raise ConfigError("estimated coefficients need integer 'n_coeff' >= 100")
        else:
            raise ConfigError(f"coeff_source kind must be 'analytic' or 'estimated', "
                              f"got {self.kind!r}")

    def to_dict(self):
        out = {"kind": self.kind}
        if self.n_coeff is not None:
            out["n_coeff"] = int(self.n_coeff)
        return out

    @classmethod
    def from_dict(cls, record):
        _strict(record, {"kind", "n_coeff"}, "coeff_source", required=("kind",))
        return cls(record["kind"], record.get("n_coeff"))


@dataclass(frozen=True)
class GridSpec:
    lo: float
    hi: float
    points: int = DEFAULT_POINTS

    def __post_init__(self):
        if not (np.isfinite(self.lo) and np.isfinite(self.hi) and self.lo < self.hi):
            raise ConfigError("grid needs finite lo < hi")
        if not isinstance(self.points, (int, np.integer)) or self.points < 2:
            raise ConfigError("grid needs at least 2 points")

    def values(self):
        return np.linspace(self.lo, self.hi, int(self.points))

    def to_dict(self):
        return {"lo": float(self.lo), "hi": float(self.hi), "points": int(self.points)}

    @classmethod
    def from_dict(cls, record):
        _strict(record, {"lo", "hi", "points"}, "grid", required=("lo", "hi"))
        try:
            return cls(float(record["lo"]), float(record["hi"]),
                       record.get("points", DEFAULT_POINTS))
        except (TypeError, ValueError):
            raise ConfigError("grid 'lo' and 'hi' must be numbers") from None


def _strict(record, allowed, where, required=()):
    if not isinstance(record, dict):
        raise ConfigError(f"{where} must be an object")
    extra = set(record) - set(allowed)
    if extra:
        raise ConfigError(f"unknown key {sorted(extra)[0]!r} in {where}")
    for key in required:
        if key not in record:
            raise ConfigError(f"missing key {key!r} in {where}")


@dataclass(frozen=True)
class ExperimentConfig:
    """One simulation run.

    ``n`` counts raw observations.  With ``block_b`` set, consecutive blocks
    of ``b`` rows are averaged and the expansion uses ``n / b`` observations
    with the aggregated moment tensor.
    """

    statistic: StatisticSpec
    n: int
    reps: int = 100000
    seed: int = 0
    block_b: int = None
    coeff_source: CoeffSource = field(default_factory=CoeffSource)
    grid: GridSpec = None
    label: str = ""

    def __post_init__(self):
        if not isinstance(self.statistic, StatisticSpec):
            raise ConfigError("statistic must be a StatisticSpec")
        for name in ("n", "reps", "seed"):
            if not isinstance(getattr(self, name), (int, np.integer)) or isinstance(
                    getattr(self, name), bool):
                raise ConfigError(f"'{name}' must be an integer")
        if self.n < 2:
            raise ConfigError("'n' must be at least 2")
        if self.reps < 1000:
            raise ConfigError("'reps' must be at least 1000")
        if not 0 <= self.seed < 2 ** 64:
            raise ConfigError("'seed' must be a non-negative 64-bit integer")
        if self.block_b is not None:
            if not isinstance(self.block_b, (int, np.integer)) or self.block_b < 1:
                raise ConfigError("'block_b' must be a positive integer")
            if self.n % self.block_b or self.n // self.block_b < 2:
                raise ConfigError("'block_b' must divide n and leave at least 2 blocks")

    @property
    def model(self) -> VectorModel:
        return self.statistic.model

    @property
    def n_eff(self) -> int:
        return self.n // (self.block_b or 1)

    def to_dict(self):
        out = {"model": self.model.to_dict(), "statistic": self.statistic.to_dict(),
               "n": int(self.n), "reps": int(self.reps), "seed": int(self.seed),
               "coeff_source": self.coeff_source.to_dict(), "label": self.label}
        if self.block_b is not None:
            out["block_b"] = int(self.block_b)
        if self.grid is not None:
            out["grid"] = self.grid.to_dict()
        return out

    KEYS = ("model", "statistic", "n", "reps", "seed", "block_b", "coeff_source",
            "grid", "label")

    @classmethod
    def from_dict(cls, record):
        _strict(record, cls.KEYS, "experiment config", required=("model", "statistic", "n"))
        model = VectorModel.from_dict(record["model"])
        spec = StatisticSpec.from_dict(record["statistic"], model)
        src = record.get("coeff_source")
        grid = record.get("grid")
        label = record.get("label", "")
        if not isinstance(label, str):
            raise ConfigError("'label' must be a string")
        return cls(spec, record["n"], record.get("reps", 100000), record.get("seed", 0),
                   record.get("block_b"),
                   CoeffSource() if src is None else CoeffSource.from_dict(src),
                   None if grid is None else GridSpec.from_dict(grid), label)

    def replace(self, **changes):
        kw = {name: getattr(self, name) for name in
              ("statistic", "n", "reps", "seed", "block_b", "coeff_source", "grid", "label")}
        kw.update(changes)
        return ExperimentConfig(**kw)


# -- coefficients -------------------------------------------------------------

def analytic_coefficients(spec: StatisticSpec, block_b: int = None):
    """Coefficients from the model's exact moments (aggregated when ``block_b``)."""
    model = spec.model
    mu = mean_vector(model)
    t = analytic_moments(model)
    if block_b and block_b > 1:
        t = t.aggregate(block_b)
    return coefficients(bundle_for(spec, mu, t.order2), t)


def coefficients_from_sample(spec: StatisticSpec, data, block_b: int = None):
    """Plug-in coefficients from rows of Z (moments and derivatives at the sample mean)."""
    mean, t = sample_moments(data)
    if block_b and block_b > 1:
        t = t.aggregate(block_b)
    return coefficients(bundle_for(spec, mean, t.order2), t)


def estimate_coefficients(spec: StatisticSpec, n_coeff: int = 10000, seed: int = 0,
                          block_b: int = None) -> ExpansionCoefficients:
    """Data-driven coefficients from ``n_coeff`` rows drawn from the model.

    Raises
    ------
    ConfigError
        If ``n_coeff < 100``.
    DegenerateStatisticError
        If the sample covariance makes sigma^2 vanish.
    """
    if int(n_coeff) < 100:
        raise ConfigError("n_coeff must be at least 100")
    data = spec.model.sample(rng_stream(seed, _STREAM_COEFF), int(n_coeff))
    return coefficients_from_sample(spec, data, block_b)


# -- distances ----------------------------------------------------------------

def ks_distance(sorted_values, cdf) -> float:
    """Exact sup-distance between the empirical CDF of a sorted sample and ``cdf``."""
    x = np.asarray(sorted_values, dtype=float)
    if x.ndim != 1 or x.size == 0:
        raise InsufficientDataError("ks_distance needs a non-empty 1-d sample")
    if np.any(np.diff(x) < 0):
        raise ConfigError("ks_distance needs values sorted ascending")
    r = x.size
    f = np.broadcast_to(np.asarray(cdf(x), dtype=float), x.shape)
    i = np.arange(1, r + 1)
    return float(max(np.max(i / r - f), np.max(f - (i - 1) / r)))


def empirical_cumulants(w):
    """Unbiased k-statistics k1..k4 of a 1-d sample."""
    w = np.asarray(w, dtype=float)
    n = w.size
    if n < 4:
        raise InsufficientDataError("need at least 4 values for k-statistics")
    d = w - w.mean()
    m2, m3, m4 = (np.mean(d ** p) for p in (2, 3, 4))
    k2 = n / (n - 1) * m2
    k3 = n * n / ((n - 1) * (n - 2)) * m3
    k4 = n * n * ((n + 1) * m4 - 3 * (n - 1) * m2 * m2) / ((n - 1) * (n - 2) * (n - 3))
    return float(w.mean()), float(k2), float(k3), float(k4)


# -- simulation ---------------------------------------------------------------

@dataclass
class SimulationReport:
    config: dict
    coefficients: dict
    n_eff: int
    reps: int
    dropped: int
    distances: dict
    grid: list
    ecdf: list
    cdf_curves: dict
    pdf_curves: dict
    histogram: dict
    negative_density_points: dict
    empirical_cumulants: list
    predicted_cumulants: list
    runtime_seconds: float = 0.0
    values: np.ndarray = field(default=None, repr=False)

    def to_json(self):
        """Report as plain data.  Wall-clock runtime is left out on purpose."""
        return {"config": self.config, "seed": self.config["seed"],
                "coefficients": self.coefficients, "n_eff": self.n_eff,
                "reps": self.reps, "dropped": self.dropped, "distances": self.distances,
                "empirical_cumulants": self.empirical_cumulants,
                "predicted_cumulants": self.predicted_cumulants,
                "negative_density_points": self.negative_density_points,
                "grid": self.grid, "ecdf": self.ecdf, "cdf_curves": self.cdf_curves,
                "pdf_curves": self.pdf_curves, "histogram": self.histogram}


def _chunk_size(cfg):
    width = max(cfg.model.k, len(cfg.model.bases))
    return int(max(1, min(_MAX_CHUNK, _CHUNK_BUDGET // (cfg.n * width))))


def simulate_values(cfg: ExperimentConfig, threads: int = 1):
    """Draw the R replications of W_n; returns (values, dropped) in chunk order."""
    model = cfg.model
    h = statistic_function(cfg.statistic)
    h_mu = float(h(mean_vector(model)))
    scale = np.sqrt(cfg.n_eff)
    size = _chunk_size(cfg)
    counts = [size] * (cfg.reps // size)
    if cfg.reps % size:
        counts.append(cfg.reps % size)

    def run(c):
        rng = rng_stream(cfg.seed, _STREAM_REPS, c)
        # the block average of block averages is the plain mean, so Zbar is
        # unaffected by aggregation; only the scaling sqrt(n/b) changes
        zbar = model.sample(rng, (counts[c], cfg.n)).mean(axis=1)
        with np.errstate(all="ignore"):
            return scale * (h(zbar) - h_mu)

    with ThreadPoolExecutor(max_workers=max(1, int(threads))) as pool:
        parts = list(pool.map(run, range(len(counts))))
    w = np.concatenate(parts)
    ok = np.isfinite(w)
    dropped = int(w.size - ok.sum())
    if dropped > DROP_CEILING * w.size:
        raise SimulationError(
            f"{dropped} of {w.size} replications gave an undefined statistic "
            f"(ceiling {DROP_CEILING:.0%})")
    return w[ok], dropped


def _coefficients_for(cfg):
    src = cfg.coeff_source
    if src.kind == "analytic":
        return analytic_coefficients(cfg.statistic, cfg.block_b)
    return estimate_coefficients(cfg.statistic, src.n_coeff, cfg.seed, cfg.block_b)


def simulate(cfg: ExperimentConfig, threads: int = 1) -> SimulationReport:
    """Simulate W_n and compare it with the normal and Edgeworth approximations.

    Replications whose statistic is undefined (for instance a zero sample
    variance) are dropped and counted; more than 1% dropped is an error.
    """
    start = time.perf_counter()
    coeffs = _coefficients_for(cfg)
    m = cfg.n_eff
    w, dropped = simulate_values(cfg, threads)
    w.sort()
    approx = [EdgeworthApprox(coeffs, m, order) for order in (0, 1, 2)]
    names = ("normal", "order1", "order2")
    distances = {name: ks_distance(w, a.cdf) for name, a in zip(names, approx)}

    if cfg.grid is None:
        centre = coeffs.b1 / np.sqrt(m)
        grid = np.linspace(centre - 6 * coeffs.sigma, centre + 6 * coeffs.sigma,
                           DEFAULT_POINTS)
    else:
        grid = cfg.grid.values()
    ecdf = np.searchsorted(w, grid, side="right") / w.size
    cdfs = {name: a.cdf(grid).tolist() for name, a in zip(names, approx)}
    pdfs = {name: a.pdf(grid) for name, a in zip(names, approx)}
    edges = np.linspace(grid[0], grid[-1], HIST_BINS + 1)
    counts, _ = np.histogram(w, bins=edges)
    density = counts / (w.size * np.diff(edges))

    report = SimulationReport(
        config=cfg.to_dict(), coefficients=coeffs.to_dict(), n_eff=m, reps=cfg.reps,
        dropped=dropped, distances=distances, grid=grid.tolist(), ecdf=ecdf.tolist(),
        cdf_curves=cdfs, pdf_curves={k: v.tolist() for k, v in pdfs.items()},
        histogram={"edges": edges.tolist(), "density": density.tolist()},
        negative_density_points={k: int(np.sum(v < 0)) for k, v in pdfs.items()},
        empirical_cumulants=list(empirical_cumulants(w)),
        predicted_cumulants=[float(c) for c in coeffs.cumulants(m)],
        values=w)
    report.runtime_seconds = time.perf_counter() - start
    return report
