"""Strict JSON configuration loading and the bundled experiment presets."""
from __future__ import annotations

import json
from dataclasses import dataclass, field

from .errors import ConfigError
from .gpcc import GpccQuery
from .model import (ChiSquare, Poisson, StatisticSpec, VectorModel, correlation_model,
                    ratio_model, zscore_model)
from .montecarlo import CoeffSource, ExperimentConfig

__all__ = ["Preset", "PRESETS", "bundled_experiments", "preset_config", "load_json",
           "gpcc_from_dict", "GPCC_KEYS", "model_from_any"]

GPCC_KEYS = ("model", "a", "shells", "directions_per_shell", "mc_draws", "seed")


def load_json(path):
    """Read a JSON object from ``path``; problems surface as ConfigError."""
    try:
        with open(path, encoding="utf-8") as fh:
            record = json.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}") from None
    if not isinstance(record, dict):
        raise ConfigError(f"config file {path} must hold a JSON object")
    return record


def gpcc_from_dict(record):
    """(GpccQuery, seed) from a strict GPCC config record."""
    if not isinstance(record, dict):
        raise ConfigError("gpcc config must be an object")
    extra = set(record) - set(GPCC_KEYS)
    if extra:
        raise ConfigError(f"unknown key {sorted(extra)[0]!r} in gpcc config")
    for key in ("model", "a", "shells"):
        if key not in record:
            raise ConfigError(f"missing key {key!r} in gpcc config")
    if not isinstance(record["shells"], list):
        raise ConfigError("'shells' must be a list of radii")
    model = VectorModel.from_dict(record["model"])
    q = GpccQuery(model, record["a"], tuple(record["shells"]),
                  record.get("directions_per_shell", 64), record.get("mc_draws", 500))
    seed = record.get("seed", 0)
    if not isinstance(seed, int) or seed < 0:
        raise ConfigError("'seed' must be a non-negative integer")
    return q, seed


def model_from_any(record):
    """The model of an experiment or GPCC config (or a bare ``{"model": ...}``)."""
    allowed = set(ExperimentConfig.KEYS) | set(GPCC_KEYS)
    extra = set(record) - allowed
    if extra:
        raise ConfigError(f"unknown key {sorted(extra)[0]!r} in config")
    if "model" not in record:
        raise ConfigError("missing key 'model' in config")
    return VectorModel.from_dict(record["model"])


@dataclass(frozen=True)
class Preset:
    name: str
    description: str
    statistic: StatisticSpec
    n_values: tuple
    reps: int = 100000
    coeff_source: CoeffSource = field(default_factory=lambda: CoeffSource("estimated", 10000))

    def config(self, n=None, seed=0, reps=None) -> ExperimentConfig:
        n = self.n_values[0] if n is None else n
        return ExperimentConfig(self.statistic, n, self.reps if reps is None else reps,
                                seed, None, self.coeff_source, None, f"{self.name}/n={n}")

    def to_dict(self):
        return {"name": self.name, "description": self.description,
                "model": self.statistic.model.to_dict(),
                "statistic": self.statistic.to_dict(), "n_values": list(self.n_values),
                "reps": self.reps, "coeff_source": self.coeff_source.to_dict()}

    @classmethod
    def from_dict(cls, record):
        keys = {"name", "description", "model", "statistic", "n_values", "reps",
                "coeff_source"}
        extra = set(record) - keys
        if extra:
            raise ConfigError(f"unknown key {sorted(extra)[0]!r} in preset")
        missing = keys - set(record)
        if missing:
            raise ConfigError(f"missing key {sorted(missing)[0]!r} in preset")
        model = VectorModel.from_dict(record["model"])
        return cls(record["name"], record["description"],
                   StatisticSpec.from_dict(record["statistic"], model),
                   tuple(record["n_values"]), record["reps"],
                   CoeffSource.from_dict(record["coeff_source"]))


def _presets():
    chi = ChiSquare(1.0)
    pois = Poisson(1.0)
    items = [
        Preset("exp1-corr-chisq",
               "Pearson correlation of independent chi-square(1) X and Y",
               StatisticSpec("pearson", correlation_model(chi, chi)), (50, 100)),
        Preset("exp2-corr-poisson-chisq",
               "Pearson correlation of independent X ~ Poisson(1), Y ~ chi-square(1)",
               StatisticSpec("pearson", correlation_model(pois, chi)), (50, 100)),
        Preset("exp3-ratio",
               "Sum of squared ratios over (X, X^2, Y1, Y2), X ~ chi-square(1), "
               "Y1, Y2 ~ Poisson(1)",
               StatisticSpec("ratio-squares", ratio_model(chi, pois, pois)),
               (100, 200, 300, 500)),
        Preset("exp4-zscore",
               "Two-sample Z-score on log-normal data with size ratio a = 1/4",
               StatisticSpec("zscore", zscore_model(), a=0.25), (5, 10, 15, 20)),
    ]
    return {p.name: p for p in items}


PRESETS = _presets()


def preset_config(name, n=None, seed=0, reps=None) -> ExperimentConfig:
    try:
        preset = PRESETS[name]
    except KeyError:
        raise ConfigError(f"unknown preset {name!r}; available: {sorted(PRESETS)}") from None
    return preset.config(n, seed, reps)


def bundled_experiments():
    """Every preset at every sample size of its ladder."""
    return [p.config(n) for p in PRESETS.values() for n in p.n_values]
