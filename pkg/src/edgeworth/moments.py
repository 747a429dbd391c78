"""Central-moment tensors of orders 2 to 4, analytic or empirical."""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, InsufficientDataError
from .model import VectorModel, mean_vector

__all__ = ["MomentTensor", "analytic_moments", "sample_moments", "symmetrize_sorted",
           "isserlis4"]

MAX_K = 16


def symmetrize_sorted(arr):
    """Copy each sorted-index entry of ``arr`` to all its index permutations.

    The result is exactly symmetric, and identical no matter which
    permutation of an entry the caller happened to compute accurately.
    """
    arr = np.asarray(arr)
    if arr.ndim < 2:
        return arr.copy()
    idx = np.indices(arr.shape).reshape(arr.ndim, -1)
    idx = np.sort(idx, axis=0)
    return arr[tuple(idx)].reshape(arr.shape)


def isserlis4(cov):
    """Gaussian pairing tensor cov_ij cov_kl + cov_ik cov_jl + cov_il cov_jk."""
    c = np.asarray(cov)
    return (np.einsum("ij,kl->ijkl", c, c) + np.einsum("ik,jl->ijkl", c, c)
            + np.einsum("il,jk->ijkl", c, c))


@dataclass(frozen=True, eq=False)
class MomentTensor:
    """Symmetric central moments of Z.

    ``order2[i, j]``, ``order3[i, j, l]`` and ``order4[i, j, l, m]`` hold
    ``E prod (Z_i - mu_i)`` over the listed coordinates.  Arrays are stored
    dense for contraction speed but are filled from sorted-index values, so
    every permutation of an index tuple returns the identical float.
    """

    order2: np.ndarray
    order3: np.ndarray
    order4: np.ndarray

    def __post_init__(self):
        k = np.shape(self.order2)[0]
        if k > MAX_K:
            raise ConfigError(f"at most {MAX_K} coordinates are supported, got {k}")
        for r, name in ((2, "order2"), (3, "order3"), (4, "order4")):
            arr = np.asarray(getattr(self, name), dtype=float)
            if arr.shape != (k,) * r:
                raise ConfigError(f"{name} must have shape {(k,) * r}, got {arr.shape}")
            arr = symmetrize_sorted(arr)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def k(self) -> int:
        return self.order2.shape[0]

    def __getitem__(self, indices):
        """``t[i, j, l]`` returns the central moment for those coordinates."""
        indices = tuple(indices)
        table = {2: self.order2, 3: self.order3, 4: self.order4}
        if len(indices) == 1:
            return 0.0
        if len(indices) not in table:
            raise KeyError(f"only orders 1 to 4 are stored, got {len(indices)} indices")
        return float(table[len(indices)][tuple(sorted(indices))])

    def aggregate(self, b: int) -> "MomentTensor":
        """Moments of the average of ``b`` i.i.d. copies of Z."""
        b = int(b)
        if b < 1:
            raise ConfigError("block size must be a positive integer")
        pairs = isserlis4(self.order2)
        # fourth cumulant scales as b^-3, the Gaussian pairing part as b^-2
        return MomentTensor(self.order2 / b, self.order3 / b ** 2,
                            (self.order4 - pairs) / b ** 3 + pairs / b ** 2)

    def permuted(self, order) -> "MomentTensor":
        o = np.asarray(order)
        return MomentTensor(self.order2[np.ix_(o, o)], self.order3[np.ix_(o, o, o)],
                            self.order4[np.ix_(o, o, o, o)])

    def to_json(self) -> dict:
        """Sorted-index keys ``"i1.i2"`` with 1-based coordinates."""
        out = {"k": self.k}
        for r, arr in ((2, self.order2), (3, self.order3), (4, self.order4)):
            out[f"order{r}"] = {
                ".".join(str(i + 1) for i in idx): float(arr[idx])
                for idx in itertools.combinations_with_replacement(range(self.k), r)}
        return out

    @classmethod
    def from_json(cls, record: dict) -> "MomentTensor":
        k = int(record["k"])
        arrays = []
        for r in (2, 3, 4):
            arr = np.zeros((k,) * r)
            for key, value in record[f"order{r}"].items():
                idx = tuple(sorted(int(p) - 1 for p in key.split(".")))
                arr[idx] = value
            arrays.append(arr)
        return cls(*arrays)


def _central_moment(model, mu, idx):
    # expand prod (Z_i - mu_i) over subsets; each raw term factorizes over bases
    total = 0.0
    r = len(idx)
    for mask in range(1 << r):
        chosen = [idx[m] for m in range(r) if mask >> m & 1]
        coeff = 1.0
        for m in range(r):
            if not mask >> m & 1:
                coeff *= -mu[idx[m]]
        if coeff == 0.0:
            continue
        total += coeff * model.product_moment(chosen)
    return total


def analytic_moments(model: VectorModel) -> MomentTensor:
    """Exact central moments of orders 2-4 from base raw moments.

    Raises :class:`~edgeworth.errors.UnsupportedDegreeError` when a fourth
    moment needs a base raw moment above ``model.max_degree``.
    """
    mu = mean_vector(model)
    k = model.k
    arrays = []
    for r in (2, 3, 4):
        arr = np.zeros((k,) * r)
        for idx in itertools.combinations_with_replacement(range(k), r):
            arr[idx] = _central_moment(model, mu, idx)
        arrays.append(arr)
    return MomentTensor(*arrays)


def sample_moments(data, block_size: int = 65536):
    """Plug-in central moments about the sample mean.

    Parameters
    ----------
    data : array_like, shape (n, k)
    block_size : int
        Rows per accumulation block.  Blocks are summed in index order so the
        result does not depend on how the caller chunks its data.

    Returns
    -------
    mean : ndarray, shape (k,)
    tensor : MomentTensor
        Normalized by ``n`` (no small-sample bias correction).
    """
    x = np.asarray(data, dtype=float)
    if x.ndim != 2:
        raise ConfigError("data must be an n x k matrix")
    n, k = x.shape
    if n < 2:
        raise InsufficientDataError(f"need at least 2 rows, got {n}")
    mean = x.mean(axis=0)
    m2 = np.zeros((k, k))
    m3 = np.zeros((k * k, k))
    m4 = np.zeros((k * k, k * k))
    for start in range(0, n, block_size):
        d = x[start:start + block_size] - mean
        p = (d[:, :, None] * d[:, None, :]).reshape(len(d), k * k)
        m2 += d.T @ d
        m3 += p.T @ d
        m4 += p.T @ p
    return mean, MomentTensor(m2 / n, m3.reshape(k, k, k) / n, m4.reshape(k, k, k, k) / n)
