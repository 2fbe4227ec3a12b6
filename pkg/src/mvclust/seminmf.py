"""Single-layer semi-NMF: X ~ Z H with H >= 0 and Z unconstrained in sign.

Used as the layer-by-layer pretraining workhorse. The basis update is the
exact least-squares solution through a right pseudo-inverse; the
representation update is the KKT-targeting multiplicative rule, which keeps
H nonnegative and never increases the reconstruction error.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import RankDeficientError, RankDeficientWarning

Array = np.ndarray

log = logging.getLogger(__name__)

# Floor for zero denominators in multiplicative updates; preserves fixed
# points to within this epsilon.
EPS_DENOM = 1e-12

# Singular values below RCOND * sigma_max are treated as zero when forming
# pseudo-inverses.
RCOND = 1e-10


def pos_neg_split(A: Array) -> tuple[Array, Array]:
    """Split A into elementwise nonnegative parts with A = plus - minus."""
    A = np.asarray(A, dtype=np.float64)
    return np.maximum(A, 0.0), np.maximum(-A, 0.0)


def mp_pinv(A: Array, warn_context: str = "", expected_rank: int | None = None) -> Array:
    """Moore-Penrose pseudo-inverse via SVD with a relative cutoff.

    Coincides with A^T (A A^T)^{-1} / (A^T A)^{-1} A^T on full-rank input.
    The SVD of the factor itself (rather than eigendecomposing its Gram)
    keeps null directions exactly null, which the normal-equation checks
    depend on. A RankDeficientWarning is emitted when the detected rank
    drops below `expected_rank` (default: full) - that signals a collapsed
    representation, as opposed to the structural low rank of deep chains.
    Raises RankDeficientError for an all-zero or non-finite matrix.
    """
    A = np.asarray(A, dtype=np.float64)
    if not np.isfinite(A).all():
        raise RankDeficientError(
            f"non-finite matrix{' in ' + warn_context if warn_context else ''}"
        )
    U, s, Vt = np.linalg.svd(A, full_matrices=False)
    if s.size == 0 or s[0] <= 0:
        raise RankDeficientError(
            f"zero matrix has no pseudo-inverse direction{' in ' + warn_context if warn_context else ''}"
        )
    keep = s > RCOND * s[0]
    rank = int(keep.sum())
    if rank < min(expected_rank if expected_rank is not None else s.size, s.size):
        # static message so the default warning filter dedups per call site;
        # the numbers go to the debug log
        warnings.warn(
            "rank-deficient factor; singular values truncated"
            + (f" in {warn_context}" if warn_context else ""),
            RankDeficientWarning,
            stacklevel=2,
        )
        log.debug(
            "rank %d < expected %s in %s (sigma_min=%.3e, sigma_max=%.3e)",
            rank, expected_rank, warn_context or "<unnamed>", s[-1], s[0],
        )
    s_inv = np.where(keep, 1.0 / np.where(keep, s, 1.0), 0.0)
    return (Vt.T * s_inv) @ U.T


def update_basis(X: Array, H: Array) -> Array:
    """Least-squares basis: Z = X H^T (H H^T)^{-1}, minimizing ||X - Z H||_F."""
    return X @ mp_pinv(H, warn_context="update_basis")


def update_representation(X: Array, Z: Array, H: Array) -> Array:
    """One multiplicative sweep of the nonnegative representation.

    H' = H * sqrt(([Z^T X]+ + [Z^T Z]- H) / ([Z^T X]- + [Z^T Z]+ H))
    with zero denominators floored at EPS_DENOM. The sign split is applied
    to the Gram matrix, then multiplied by the nonnegative H: the Gram
    diagonal keeps the denominator positive wherever H is, which bounds the
    step and gives monotone descent; splitting the product instead admits
    vanishing denominators and diverges. Preserves H >= 0; zero entries of
    H stay zero.
    """
    ZtX = Z.T @ X
    gram_p, gram_m = pos_neg_split(Z.T @ Z)
    xp, xm = pos_neg_split(ZtX)
    num = xp + gram_m @ H
    den = xm + gram_p @ H
    return H * np.sqrt(num / np.maximum(den, EPS_DENOM))


@dataclass
class SemiNmfResult:
    """Factorization output: basis Z (d, l), representation H (l, n) >= 0,
    the final Frobenius reconstruction error, and the per-sweep error history."""

    Z: Array
    H: Array
    residual: float
    iters: int
    history: Array


def _init_representation(X: Array, l: int, rng: np.random.Generator) -> Array:
    # uniform in (0, 1], scale-matched to the data so early updates stay
    # well inside float range
    scale = np.linalg.norm(X) / (l * X.shape[1])
    return (1.0 - rng.random((l, X.shape[1]))) * scale


def fit_seminmf(
    X: Array,
    l: int,
    iters: int,
    seed,
    tol: float = 1e-6,
) -> SemiNmfResult:
    """Alternate basis/representation updates from a seeded random H.

    Runs at most `iters` sweeps, stopping early when the relative change of
    the reconstruction error drops below `tol`. `l` must not exceed the
    sample count; widths above the feature count are permitted (the basis
    update only needs H to have full row rank).
    """
    X = np.asarray(X, dtype=np.float64)
    d, n = X.shape
    if l > n:
        raise RankDeficientError(f"layer width {l} exceeds sample count {n}")
    if iters < 1:
        raise ValueError("iters must be >= 1")
    rng = np.random.default_rng(seed)
    H = _init_representation(X, l, rng)
    Z = np.zeros((d, l))
    history = []
    prev = np.inf
    for _ in range(iters):
        Z = update_basis(X, H)
        H = update_representation(X, Z, H)
        res = float(np.linalg.norm(X - Z @ H))
        history.append(res)
        if prev < np.inf and abs(prev - res) <= tol * max(prev, EPS_DENOM):
            break
        prev = res
    hist = np.asarray(history)
    return SemiNmfResult(Z=Z, H=H, residual=hist[-1], iters=len(hist), history=hist)
