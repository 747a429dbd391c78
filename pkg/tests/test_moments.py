import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate, stats

from edgeworth import (ChiSquare, ConfigError, InsufficientDataError, MomentTensor,
                       Normal, Poisson, VectorModel, analytic_moments, correlation_model,
                       covariance_matrix, sample_moments, zscore_model)
from edgeworth.moments import symmetrize_sorted


def _poisson_oracle(lam, rows, order_idx):
    # direct summation over the support of a single Poisson base
    y = np.arange(0, 120, dtype=float)
    pmf = stats.poisson.pmf(y, lam)
    z = np.stack([y ** r for r in rows], axis=-1)
    mu = pmf @ z
    prod = np.ones_like(y)
    for i in order_idx:
        prod = prod * (z[:, i] - mu[i])
    return pmf @ prod


def test_single_poisson_base_matches_direct_summation():
    rows = [1, 2, 3]
    m = VectorModel((Poisson(1.3),), [[r] for r in rows])
    t = analytic_moments(m)
    for r in (2, 3, 4):
        for idx in itertools.combinations_with_replacement(range(3), r):
            assert t[idx] == pytest.approx(_poisson_oracle(1.3, rows, idx), rel=1e-10)


def test_chisquare_base_matches_quadrature():
    m = VectorModel((ChiSquare(2.0),), [[1], [2]])
    t = analytic_moments(m)
    mu = [2.0, 8.0]
    pdf = stats.chi2(2).pdf
    for idx in [(0, 0), (0, 1), (1, 1), (0, 0, 1), (0, 1, 1, 1), (1, 1, 1, 1)]:
        f = lambda x: np.prod([x ** (i + 1) - mu[i] for i in idx]) * pdf(x)
        val, _ = integrate.quad(f, 0, np.inf, epsrel=1e-12, limit=200)
        assert t[idx] == pytest.approx(val, rel=1e-8)


def test_order2_equals_covariance():
    m = correlation_model(Poisson(1.0), ChiSquare(1.0))
    np.testing.assert_allclose(analytic_moments(m).order2, covariance_matrix(m), rtol=1e-14)


def test_normal_fourth_moments_are_isserlis():
    m = VectorModel((Normal(0, 1), Normal(0, 2)), [[1, 0], [0, 1]])
    t = analytic_moments(m)
    assert t[0, 0, 0, 0] == 3.0 and t[1, 1, 1, 1] == 12.0 and t[0, 0, 1, 1] == 2.0
    assert t[0, 0, 1] == 0.0


def test_order1_entry_is_zero_and_bad_order_raises():
    t = analytic_moments(zscore_model())
    assert t[(2,)] == 0.0
    with pytest.raises(KeyError):
        t[0, 0, 0, 0, 0]


def test_sample_moments_converge(rng):
    m = correlation_model(Poisson(1.0), Normal(0.5, 1.0))
    z = m.sample(rng, 300000)
    mean, t = sample_moments(z)
    exact = analytic_moments(m)
    np.testing.assert_allclose(t.order2, exact.order2, atol=0.06, rtol=0.05)
    np.testing.assert_allclose(t.order3, exact.order3, atol=0.3, rtol=0.1)


def test_sample_moments_error_shrinks_with_n():
    m = VectorModel((Poisson(1.0), Normal(0.5, 1.0)), [[1, 0], [0, 1], [1, 1]])
    exact = analytic_moments(m)
    errs = []
    for n in (10 ** 4, 10 ** 5, 10 ** 6):
        # average over a fixed seed ladder; a single max-norm error is too noisy
        e = []
        for seed in range(5):
            _, t = sample_moments(m.sample(np.random.default_rng(seed), n))
            e.append(max(np.abs(getattr(t, f"order{r}") - getattr(exact, f"order{r}")).max()
                         for r in (2, 3, 4)))
        errs.append(np.mean(e))
    assert errs[0] > errs[1] > errs[2]
    # roughly n^-1/2: a factor 100 in n gives about a factor 10 in error
    assert 4 < errs[0] / errs[2] < 25


def test_sample_moments_independent_of_block_size(rng):
    z = rng.standard_normal((1000, 3))
    _, a = sample_moments(z, block_size=7)
    _, b = sample_moments(z, block_size=1000)
    np.testing.assert_allclose(a.order4, b.order4, rtol=1e-12)
    # plug-in normalization by n
    _, t = sample_moments(np.array([[0.0], [2.0]]))
    assert t[0, 0] == 1.0


def test_sample_moments_needs_two_rows():
    with pytest.raises(InsufficientDataError):
        sample_moments(np.ones((1, 3)))
    with pytest.raises(ConfigError):
        sample_moments(np.ones(5))


def test_aggregate_matches_poisson_of_block_sum():
    # the mean of b Poisson(lam) draws is Poisson(b lam) / b
    lam, b = 0.7, 5
    agg = analytic_moments(VectorModel((Poisson(lam),), [[1]])).aggregate(b)
    big = analytic_moments(VectorModel((Poisson(b * lam),), [[1]]))
    assert agg[0, 0] == pytest.approx(big[0, 0] / b ** 2, rel=1e-12)
    assert agg[0, 0, 0] == pytest.approx(big[0, 0, 0] / b ** 3, rel=1e-12)
    assert agg[0, 0, 0, 0] == pytest.approx(big[0, 0, 0, 0] / b ** 4, rel=1e-12)
    assert agg.aggregate(1).order4.tolist() == agg.order4.tolist()


def test_json_round_trip_uses_one_based_keys():
    t = analytic_moments(correlation_model(ChiSquare(1.0), Poisson(1.0)))
    rec = t.to_json()
    assert "1.3.5" in rec["order3"] and "0.1" not in rec["order2"]
    back = MomentTensor.from_json(rec)
    np.testing.assert_array_equal(back.order4, t.order4)


def test_permuted_tensor_consistent_with_permuted_model():
    m = correlation_model(ChiSquare(1.0), Poisson(2.0))
    order = [3, 1, 4, 0, 2]
    a = analytic_moments(m).permuted(order)
    b = analytic_moments(m.permuted(order))
    np.testing.assert_allclose(a.order4, b.order4, rtol=1e-12)


def test_too_many_coordinates_rejected():
    with pytest.raises(ConfigError):
        MomentTensor(np.zeros((17, 17)), np.zeros((17,) * 3), np.zeros((17,) * 4))


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 4), st.integers(2, 4), st.integers(0, 10 ** 6))
def test_symmetrize_gives_identical_permutation_values(k, r, seed):
    arr = symmetrize_sorted(np.random.default_rng(seed).normal(size=(k,) * r))
    for idx in itertools.product(range(k), repeat=r):
        for perm in itertools.permutations(idx):
            assert arr[perm] == arr[idx]


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_analytic_tensor_is_exactly_symmetric(seed):
    r = np.random.default_rng(seed)
    m = VectorModel((Poisson(float(r.uniform(0.3, 2))), ChiSquare(float(r.uniform(1, 3)))),
                    r.integers(0, 3, size=(3, 2)) + np.array([[1, 0], [0, 1], [1, 1]]))
    t = analytic_moments(m)
    for idx in itertools.product(range(3), repeat=4):
        assert t.order4[idx] == t.order4[tuple(sorted(idx))]
