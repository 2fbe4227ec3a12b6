import numpy as np
import pytest

from mvclust import fit_seminmf, pos_neg_split, update_basis, update_representation
from mvclust.errors import RankDeficientError
from mvclust.seminmf import mp_pinv

from conftest import planted_two_blocks


def test_pos_neg_split_definition():
    plus, minus = pos_neg_split(np.array([[1.0, -2.0], [0.0, 3.0]]))
    assert np.array_equal(plus, [[1.0, 0.0], [0.0, 3.0]])
    assert np.array_equal(minus, [[0.0, 2.0], [0.0, 0.0]])


def test_pos_neg_split_zero():
    plus, minus = pos_neg_split(np.zeros((3, 3)))
    assert not plus.any() and not minus.any()


def test_pos_neg_split_roundtrip():
    rng = np.random.default_rng(0)
    A = rng.standard_normal((5, 5))
    plus, minus = pos_neg_split(A)
    assert np.array_equal(plus - minus, A)
    assert plus.min() >= 0 and minus.min() >= 0
    assert not (plus * minus).any()


def test_update_basis_consistent_system():
    rng = np.random.default_rng(1)
    Z0 = rng.standard_normal((7, 3))
    H0 = rng.random((3, 15)) + 0.1
    X = Z0 @ H0
    Z = update_basis(X, H0)
    assert np.linalg.norm(X - Z @ H0) <= 1e-10


def test_update_basis_identity_representation():
    rng = np.random.default_rng(2)
    X = rng.standard_normal((5, 4))
    Z = update_basis(X, np.eye(4))
    assert np.allclose(Z, X, atol=1e-12)


def test_update_basis_matches_normal_equations():
    rng = np.random.default_rng(3)
    X = rng.standard_normal((8, 20))
    H = rng.random((3, 20))
    Z = update_basis(X, H)
    oracle = np.linalg.solve(H @ H.T, H @ X.T).T  # independent dense solve
    assert np.abs(Z - oracle).max() <= 1e-9


def test_update_basis_residual_orthogonality():
    rng = np.random.default_rng(4)
    X = rng.standard_normal((6, 18))
    H = rng.random((4, 18))
    Z = update_basis(X, H)
    assert np.linalg.norm((X - Z @ H) @ H.T) <= 1e-8 * np.linalg.norm(X)


def test_update_basis_optimality_under_perturbation():
    rng = np.random.default_rng(5)
    X = rng.standard_normal((6, 14))
    H = rng.random((3, 14))
    Z = update_basis(X, H)
    base = np.linalg.norm(X - Z @ H)
    for _ in range(100):
        delta = rng.standard_normal(Z.shape)
        delta *= 1e-3 / np.linalg.norm(delta)
        assert np.linalg.norm(X - (Z + delta) @ H) >= base


def test_pinv_raises_on_collapse():
    with pytest.raises(RankDeficientError):
        mp_pinv(np.zeros((3, 3)))
    with pytest.raises(RankDeficientError):
        mp_pinv(np.full((2, 2), np.nan))


def test_update_representation_fixed_point():
    rng = np.random.default_rng(6)
    Z = rng.standard_normal((7, 3))
    H = rng.random((3, 11)) + 0.05
    X = Z @ H
    H2 = update_representation(X, Z, H)
    assert np.abs(H2 - H).max() <= 1e-9 * max(1.0, np.abs(H).max())


def test_update_representation_keeps_zero_rows():
    rng = np.random.default_rng(7)
    Z = rng.standard_normal((6, 3))
    H = rng.random((3, 9))
    H[1] = 0.0
    X = rng.standard_normal((6, 9))
    H2 = update_representation(X, Z, H)
    assert not H2[1].any()
    assert H2.min() >= 0


def test_alternating_sweeps_monotone():
    rng = np.random.default_rng(8)
    X = rng.standard_normal((6, 12))
    H = rng.random((3, 12))
    prev = np.inf
    for _ in range(50):
        Z = update_basis(X, H)
        H = update_representation(X, Z, H)
        res = np.linalg.norm(X - Z @ H)
        assert res <= prev + 1e-10
        assert H.min() >= 0
        prev = res


def test_fit_seminmf_recovers_planted_blocks():
    X, labels = planted_two_blocks(d=6, n=12, seed=0)
    res = fit_seminmf(X, 2, iters=200, seed=0)
    pred = res.H.argmax(axis=0)
    same = (pred == labels).all() or (pred == 1 - labels).all()
    assert same


def test_fit_seminmf_history_contract():
    rng = np.random.default_rng(9)
    X = rng.standard_normal((5, 10))
    res = fit_seminmf(X, 2, iters=1, seed=3)
    assert res.iters == 1 and len(res.history) == 1
    assert res.residual == res.history[-1]
    assert res.residual == pytest.approx(np.linalg.norm(X - res.Z @ res.H), abs=1e-12)


def test_fit_seminmf_deterministic():
    rng = np.random.default_rng(10)
    X = rng.standard_normal((6, 14))
    a = fit_seminmf(X, 3, iters=40, seed=11)
    b = fit_seminmf(X, 3, iters=40, seed=11)
    assert np.array_equal(a.Z, b.Z)
    assert np.array_equal(a.H, b.H)
    assert np.array_equal(a.history, b.history)


def test_fit_seminmf_rejects_wide_layer():
    with pytest.raises(RankDeficientError):
        fit_seminmf(np.ones((4, 3)), 4, iters=5, seed=0)
