"""Shared builders for the test suite: random-but-valid model states,
planted datasets, and small independent numerical oracles."""

import numpy as np
import pytest

from mvclust import (
    FactorStack,
    FitConfig,
    LayerSpec,
    ModelState,
    MultiViewDataset,
    update_consensus_graph,
    validate_dataset,
)


def random_state(
    dims=(8, 6),
    layer_sizes=(4, 2),
    n=12,
    beta=0.5,
    seed=0,
    alpha=None,
) -> ModelState:
    """A fully valid ModelState with random factors (H >= 0, Z mixed sign)."""
    rng = np.random.default_rng(seed)
    views = []
    stacks = []
    for d in dims:
        X = rng.standard_normal((d, n))
        views.append(X)
        mappings, reps = [], []
        rows = d
        for l in layer_sizes:
            mappings.append(rng.standard_normal((rows, l)))
            reps.append(rng.random((l, n)))
            rows = l
        stacks.append(FactorStack(mappings=mappings, representations=reps))
    V = len(dims)
    if alpha is None:
        a = rng.random(V)
        alpha = a / a.sum()
    else:
        alpha = np.asarray(alpha, dtype=float)
    S = update_consensus_graph(rng.random((n, n)))
    state = ModelState(views=views, stacks=stacks, S=S, alpha=alpha, beta=beta)
    return state.validate()


def planted_two_blocks(d=6, n=12, noise=0.0, seed=0):
    """Block-structured matrix whose columns split into two clear groups."""
    rng = np.random.default_rng(seed)
    X = np.zeros((d, n))
    half_d, half_n = d // 2, n // 2
    X[:half_d, :half_n] = 1.0 + 0.2 * rng.random((half_d, half_n))
    X[half_d:, half_n:] = 1.0 + 0.2 * rng.random((d - half_d, n - half_n))
    if noise:
        X += noise * rng.standard_normal((d, n))
    labels = np.array([0] * half_n + [1] * (n - half_n))
    return X, labels


def hierarchical_dataset(
    n=180,
    n_views=2,
    dims=(16, 20),
    super_sep=24.0,
    sub_sep=5.0,
    sigma=1.0,
    seed=0,
) -> MultiViewDataset:
    """3 super-clusters, each split into 2 sub-clusters; labels are the supers."""
    rng_master = np.random.default_rng(seed)
    n_super, n_sub = 3, 2
    groups = n_super * n_sub
    labels_fine = np.arange(n) % groups
    rng_master.shuffle(labels_fine)
    labels = labels_fine // n_sub
    views = []
    for d in dims:
        rng = np.random.default_rng(rng_master.integers(2**63))
        supers = rng.standard_normal((n_super, d))
        supers *= super_sep / np.linalg.norm(supers, axis=1, keepdims=True)
        centers = np.repeat(supers, n_sub, axis=0)
        centers += sub_sep * rng.standard_normal(centers.shape) / np.sqrt(d)
        X = centers[labels_fine].T + sigma * rng.standard_normal((d, n))
        views.append(X)
    return validate_dataset(MultiViewDataset(views=views, labels=labels))


def jacobi_eigh(A, sweeps=100, tol=1e-14):
    """Cyclic Jacobi eigensolver for small symmetric matrices (test oracle)."""
    A = np.array(A, dtype=float)
    n = A.shape[0]
    V = np.eye(n)
    for _ in range(sweeps):
        off = np.sqrt((A**2).sum() - (np.diag(A) ** 2).sum())
        if off < tol:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                if abs(A[p, q]) < 1e-300:
                    continue
                theta = 0.5 * np.arctan2(2 * A[p, q], A[q, q] - A[p, p])
                c, s = np.cos(theta), np.sin(theta)
                J = np.eye(n)
                J[p, p] = J[q, q] = c
                J[p, q] = s
                J[q, p] = -s
                A = J.T @ A @ J
                V = V @ J
    w = np.diag(A).copy()
    order = np.argsort(w)
    return w[order], V[:, order]


def brute_force_row_projection(q, zero_index):
    """Exhaustive active-set solve of min ||s - q||^2, s >= 0, sum s = 1,
    s[zero_index] = 0 (test oracle for the graph row projection)."""
    import itertools

    n = len(q)
    free = [i for i in range(n) if i != zero_index]
    best, best_d = None, np.inf
    for r in range(1, len(free) + 1):
        for support in itertools.combinations(free, r):
            shift = (1.0 - sum(q[list(support)])) / r
            cand = {i: q[i] + shift for i in support}
            if any(val < -1e-12 for val in cand.values()):
                continue
            s = np.zeros(n)
            for i, val in cand.items():
                s[i] = max(val, 0.0)
            # the pinned coordinate contributes a constant, so compare over
            # the free coordinates only
            d = sum((s[i] - q[i]) ** 2 for i in free)
            if d < best_d - 1e-15:
                best, best_d = s, d
    return best


def simple_config(layers, beta=0.5, **kw) -> FitConfig:
    defaults = dict(max_outer_iters=30, pretrain_iters=50, rng_seed=0)
    defaults.update(kw)
    return FitConfig(beta=beta, layers=LayerSpec(layers), **defaults)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
