"""Scaled empirical cumulants of the chi-square correlation statistic against b3, b4.

sqrt(n) k3 and n k4 approach b3 = 8 and b4 = 138 only slowly; the residual
at moderate n is the next term of the expansion, not a coefficient error.
"""
import numpy as np

from edgeworth import (ChiSquare, ExperimentConfig, StatisticSpec, analytic_coefficients,
                       correlation_model)
from edgeworth.montecarlo import empirical_cumulants, simulate_values

spec = StatisticSpec("pearson", correlation_model(ChiSquare(1.0), ChiSquare(1.0)))
c = analytic_coefficients(spec)
print(f"b3 = {c.b3:.4f}, b4 = {c.b4:.4f}")
for n in (50, 100, 400, 1600):
    w, _ = simulate_values(ExperimentConfig(spec, n, 100_000, seed=1))
    batches = np.array([empirical_cumulants(b) for b in np.array_split(w, 20)])
    k, se = batches.mean(0), batches.std(0, ddof=1) / np.sqrt(20)
    print(f"n={n:5d}  sqrt(n) k3 = {np.sqrt(n) * k[2]:6.3f} +- {np.sqrt(n) * se[2]:.3f}"
          f"   n k4 = {n * k[3]:7.2f} +- {n * se[3]:.2f}")
