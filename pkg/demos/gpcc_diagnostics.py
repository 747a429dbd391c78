"""Conditional characteristic-function modulus for a few base models."""
import numpy as np

from edgeworth import (ChiSquare, GpccQuery, Poisson, VectorModel, correlation_model,
                       estimate_modulus, jacobian_check)

cases = {
    "Poisson lattice, a=1": GpccQuery(VectorModel((Poisson(1.0),), [[1]]), 1,
                                      (np.pi, 2 * np.pi, 4 * np.pi), 8, 200),
    "(X, X^2) chi-square, a=2": GpccQuery(VectorModel((ChiSquare(1.0),), [[1], [2]]), 2,
                                          (5.0, 20.0, 50.0), 32, 300),
    # (X, X^2, XY | Y, Y^2) with X chi-square and Y Poisson
    "chi-square x Poisson, a=3": GpccQuery(
        correlation_model(ChiSquare(1.0), Poisson(1.0)).permuted([0, 2, 4, 1, 3]), 3,
        (5.0, 20.0, 50.0), 32, 200),
}
for name, q in cases.items():
    r = estimate_modulus(q, seed=0)
    shells = ", ".join(f"{s:g}: {m:.3f}" for s, m in zip(r.shells, r.max_estimate))
    print(f"{name:28s} max modulus by radius  {shells}  -> {r.verdict}")

# the identity coordinate is implicit: maps list K_1 .. K_{k-1}
for maps in (["2*z1 + 3"], ["z1^2"], ["z1^2", "z1^3"]):
    frac = jacobian_check(maps, ChiSquare(1.0), 2000).fraction_singular
    print(f"singular Jacobian fraction, Z = (z1, {', '.join(maps)}): {frac}")
