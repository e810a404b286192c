"""SVD and nuclear-norm machinery, checked against numpy oracles."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from jacreg.linalg import (ShrinkagePolicy, check_subgradient_optimality,
                           frobenius_sq, nuclear_norm, optimal_shrink,
                           srebro_factorize, svd, svt)


def random_matrix(rng, m, n, rank=None):
    if rank is None:
        return rng.normal(size=(m, n))
    return rng.normal(size=(m, rank)) @ rng.normal(size=(rank, n))


@pytest.mark.parametrize("shape", [(1, 1), (3, 3), (5, 3), (3, 5), (8, 8),
                                   (12, 4)])
def test_svd_matches_numpy_singular_values(shape):
    rng = np.random.default_rng(hash(shape) & 0xFFFF)
    A = rng.normal(size=shape)
    res = svd(A)
    np.testing.assert_allclose(res.sigma, np.linalg.svd(A, compute_uv=False),
                               atol=1e-10)


@given(st.integers(1, 6), st.integers(1, 6), st.integers(0, 10_000))
@settings(max_examples=60, deadline=None)
def test_svd_invariants(m, n, seed):
    rng = np.random.default_rng(seed)
    A = rng.normal(size=(m, n))
    res = svd(A)
    k = min(m, n)
    assert res.U.shape == (m, k) and res.V.shape == (n, k)
    np.testing.assert_allclose(res.U.T @ res.U, np.eye(k), atol=1e-10)
    np.testing.assert_allclose(res.V.T @ res.V, np.eye(k), atol=1e-10)
    np.testing.assert_allclose(res.reconstruct(), A, atol=1e-9)
    assert np.all(res.sigma >= 0)
    assert np.all(np.diff(res.sigma) <= 1e-15)


def test_svd_of_zero_matrix():
    res = svd(np.zeros((4, 3)))
    assert res.rank == 0
    np.testing.assert_array_equal(res.sigma, np.zeros(3))
    np.testing.assert_allclose(res.U.T @ res.U, np.eye(3), atol=1e-12)


def test_svd_rank_deficient():
    rng = np.random.default_rng(3)
    A = random_matrix(rng, 6, 5, rank=2)
    res = svd(A)
    assert res.rank == 2
    np.testing.assert_allclose(res.reconstruct(), A, atol=1e-9)


def test_svd_rejects_bad_input():
    with pytest.raises(ValueError):
        svd(np.ones(3))
    with pytest.raises(ValueError):
        svd(np.array([[np.nan, 1.0], [0.0, 1.0]]))


def test_nuclear_norm_oracle():
    rng = np.random.default_rng(4)
    A = rng.normal(size=(5, 7))
    assert abs(nuclear_norm(A)
               - np.sum(np.linalg.svd(A, compute_uv=False))) < 1e-10


def test_frobenius_sq_oracle():
    A = np.array([[1.0, 2.0], [3.0, -4.0]])
    assert frobenius_sq(A) == 30.0


def test_srebro_identity_and_reconstruction():
    rng = np.random.default_rng(5)
    for _ in range(20):
        A = rng.normal(size=rng.integers(1, 7, size=2))
        U, V = srebro_factorize(A)
        np.testing.assert_allclose(U @ V.T, A, atol=1e-9)
        energy = 0.5 * (frobenius_sq(U) + frobenius_sq(V))
        assert abs(energy - nuclear_norm(A)) < 1e-8


def test_random_factorizations_never_beat_srebro():
    rng = np.random.default_rng(6)
    A = rng.normal(size=(4, 3))
    nuc = nuclear_norm(A)
    U0, V0 = srebro_factorize(A)
    r = U0.shape[1]
    for _ in range(200):
        # any invertible mixing keeps U V^T = A but changes the energy
        M = rng.normal(size=(r, r)) + 2.0 * np.eye(r)
        U = U0 @ M
        V = V0 @ np.linalg.inv(M).T
        energy = 0.5 * (frobenius_sq(U) + frobenius_sq(V))
        np.testing.assert_allclose(U @ V.T, A, atol=1e-8)
        assert energy >= nuc - 1e-8


def test_svt_matches_numpy_oracle():
    rng = np.random.default_rng(7)
    Y = rng.normal(size=(6, 4))
    tau = 0.8
    U, s, Vt = np.linalg.svd(Y, full_matrices=False)
    expect = (U * np.maximum(s - tau, 0.0)) @ Vt
    np.testing.assert_allclose(svt(Y, tau), expect, atol=1e-9)


def test_svt_is_the_proximal_minimizer():
    rng = np.random.default_rng(8)
    Y = rng.normal(size=(5, 5))
    tau = 0.6
    A = svt(Y, tau)
    obj = 0.5 * np.sum((A - Y) ** 2) + tau * nuclear_norm(A)
    for _ in range(300):
        C = A + rng.normal(0.0, 0.2, size=A.shape)
        cand = 0.5 * np.sum((C - Y) ** 2) + tau * nuclear_norm(C)
        assert cand >= obj - 1e-9


def test_svt_rejects_negative_threshold():
    with pytest.raises(ValueError):
        svt(np.eye(2), -0.1)


def test_optimal_shrink_formula_bit_level():
    rng = np.random.default_rng(9)
    Y = rng.normal(size=(6, 30))
    eta = 0.04
    N = Y.shape[1]
    res = optimal_shrink(Y, eta)
    cutoff = N * eta
    for d, s in enumerate(res.svd_y.sigma):
        if s > 0.0 and s * s >= cutoff:
            assert res.gamma[d] == 1.0 - cutoff / (s * s)
            assert res.shrunk_sigma[d] == (s * s - cutoff) / s
        else:
            assert res.gamma[d] == 0.0
            assert res.shrunk_sigma[d] == 0.0


def test_optimal_shrink_operator_is_symmetric_contraction():
    rng = np.random.default_rng(10)
    Y = rng.normal(size=(5, 40))
    res = optimal_shrink(Y, 0.05)
    np.testing.assert_allclose(res.A_star, res.A_star.T, atol=1e-12)
    top = np.linalg.svd(res.A_star, compute_uv=False)[0]
    assert top <= 1.0 + 1e-12


def test_optimal_shrink_eta_zero_is_identity_on_row_space():
    rng = np.random.default_rng(11)
    Y = rng.normal(size=(4, 20))
    res = optimal_shrink(Y, 0.0)
    np.testing.assert_allclose(res.denoised, Y, atol=1e-9)


def test_subgradient_condition_holds_at_the_shrinker():
    rng = np.random.default_rng(12)
    for _ in range(5):
        Y = rng.normal(size=(6, 25))
        eta = float(rng.uniform(0.01, 0.2))
        res = optimal_shrink(Y, eta)
        rep = check_subgradient_optimality(res.A_star, Y, eta)
        assert rep.satisfied(tol=1e-8), rep


def test_subgradient_condition_fails_away_from_the_optimum():
    rng = np.random.default_rng(13)
    Y = rng.normal(size=(6, 25))
    eta = 0.05
    res = optimal_shrink(Y, eta)
    bad = res.A_star + 0.2 * rng.normal(size=res.A_star.shape)
    rep = check_subgradient_optimality(bad, Y, eta)
    assert not rep.satisfied(tol=1e-8)


def test_subgradient_check_requires_positive_eta():
    with pytest.raises(ValueError):
        check_subgradient_optimality(np.eye(2), np.ones((2, 4)), 0.0)


def test_shrinkage_policy_validation():
    ShrinkagePolicy(kind="soft_threshold", threshold=0.5)
    with pytest.raises(ValueError):
        ShrinkagePolicy(kind="hard", threshold=0.5)
    with pytest.raises(ValueError):
        ShrinkagePolicy(kind="optimal_gamma", threshold=-1.0)


def test_holder_inequality_sanity():
    # |<A, B>| <= ||A||_* sigma_max(B)
    rng = np.random.default_rng(14)
    for _ in range(20):
        A = rng.normal(size=(4, 5))
        B = rng.normal(size=(4, 5))
        inner = abs(np.sum(A * B))
        bound = nuclear_norm(A) * np.linalg.svd(B, compute_uv=False)[0]
        assert inner <= bound + 1e-9
