"""Clustering quality metrics: accuracy (optimal label matching), NMI, purity.

All three are computed from the contingency table and are invariant under
relabeling of either partition. Accuracy matches clusters to classes with a
minimum-cost assignment on the negated contingency table.
"""

from __future__ import annotations

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import LengthMismatchError
from .spectral import Partition

Array = np.ndarray


def hungarian(cost: Array) -> Array:
    """Permutation p minimizing sum_i cost[i, p[i]] over a square cost matrix."""
    cost = np.asarray(cost, dtype=np.float64)
    if cost.ndim != 2 or cost.shape[0] != cost.shape[1]:
        raise ValueError(f"cost matrix must be square, got shape {cost.shape}")
    if not np.isfinite(cost).all():
        raise ValueError("cost matrix must be finite")
    _, col_ind = linear_sum_assignment(cost)
    return col_ind


def _labels_of(p) -> Array:
    labels = p.labels if isinstance(p, Partition) else np.asarray(p)
    return np.asarray(labels, dtype=np.int64).ravel()


def contingency_table(pred, truth) -> Array:
    """Counts C[i, j] = #{samples with pred class i and truth class j}.

    Classes are the distinct labels of each side, in sorted order.
    """
    a = _labels_of(pred)
    b = _labels_of(truth)
    if a.shape[0] != b.shape[0]:
        raise LengthMismatchError(f"{a.shape[0]} predictions vs {b.shape[0]} truths")
    if a.shape[0] == 0:
        raise LengthMismatchError("empty label sequences")
    _, ai = np.unique(a, return_inverse=True)
    _, bi = np.unique(b, return_inverse=True)
    C = np.zeros((ai.max() + 1, bi.max() + 1), dtype=np.int64)
    np.add.at(C, (ai, bi), 1)
    return C


def accuracy(pred, truth) -> float:
    """Fraction of samples correct under the best cluster-to-class mapping.

    The contingency table is zero-padded to square when the class counts
    differ, then matched by minimum-cost assignment on its negation.
    """
    C = contingency_table(pred, truth)
    size = max(C.shape)
    P = np.zeros((size, size), dtype=np.float64)
    P[: C.shape[0], : C.shape[1]] = C
    perm = hungarian(-P)
    matched = P[np.arange(size), perm].sum()
    return float(matched / C.sum())


def nmi(pred, truth, normalization: str = "geometric") -> float:
    """Mutual information of the two partitions, normalized by their entropies.

    Natural log; `normalization` is "geometric" (sqrt(Hp * Ht), default),
    "arithmetic" ((Hp + Ht)/2), or "max". A zero normalizer (at least one
    trivial partition) yields 0 by convention.
    """
    C = contingency_table(pred, truth).astype(np.float64)
    n = C.sum()
    pij = C / n
    pi = pij.sum(axis=1)
    qj = pij.sum(axis=0)
    nz = pij > 0
    mi = float((pij[nz] * np.log(pij[nz] / np.outer(pi, qj)[nz])).sum())
    hp = float(-(pi[pi > 0] * np.log(pi[pi > 0])).sum())
    ht = float(-(qj[qj > 0] * np.log(qj[qj > 0])).sum())
    if normalization == "geometric":
        denom = np.sqrt(hp * ht)
    elif normalization == "arithmetic":
        denom = 0.5 * (hp + ht)
    elif normalization == "max":
        denom = max(hp, ht)
    else:
        raise ValueError(f"unknown normalization {normalization!r}")
    if denom == 0.0:
        return 0.0
    return float(min(max(mi / denom, 0.0), 1.0))


def purity(pred, truth) -> float:
    """Mean over samples of belonging to their cluster's majority class."""
    C = contingency_table(pred, truth)
    return float(C.max(axis=1).sum() / C.sum())
