"""Core domain types and the dimensional contract shared by all modules.

Conventions: matrices are dense float64, samples are columns. A dataset holds
V view matrices X^(v) of shape (d_v, n) over the same n samples. A factor
stack holds per-layer mappings Z_i and nonnegative representations H_i with
composing shapes; the model state adds the n x n consensus graph S (row
sums 1, zero diagonal, nonnegative) and the simplex weight vector alpha.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DimensionMismatchError,
    LabelRangeError,
    LayerSpecError,
    MvclustError,
    NonFiniteEntryError,
)

Array = np.ndarray

ROW_SUM_TOL = 1e-9
ALPHA_SUM_TOL = 1e-12


def _as_matrix(a) -> Array:
    out = np.asarray(a, dtype=np.float64)
    if out.ndim != 2:
        raise DimensionMismatchError(f"expected a 2-D matrix, got ndim={out.ndim}")
    return out


@dataclass
class MultiViewDataset:
    """V feature matrices over the same samples, with optional ground truth.

    views : list of (d_v, n) arrays, one per view (features x samples)
    labels : optional (n,) int array of class ids 0..k-1, every class present
    """

    views: list[Array]
    labels: Array | None = None

    def __post_init__(self):
        self.views = [_as_matrix(v) for v in self.views]
        if self.labels is not None:
            self.labels = np.asarray(self.labels, dtype=np.int64)

    @property
    def n(self) -> int:
        return self.views[0].shape[1]

    @property
    def num_views(self) -> int:
        return len(self.views)

    @property
    def view_dims(self) -> list[int]:
        return [v.shape[0] for v in self.views]

    @property
    def k(self) -> int | None:
        """Number of classes when labels are present, else None."""
        if self.labels is None:
            return None
        return int(self.labels.max()) + 1


def validate_dataset(ds: MultiViewDataset) -> MultiViewDataset:
    """Check every dataset invariant; return the dataset unchanged on success.

    Raises DimensionMismatchError when views disagree on the sample count or
    n < 2, NonFiniteEntryError (with view/row/col) on NaN/inf entries, and
    LabelRangeError when labels are the wrong length, negative, or leave a
    class id unused.
    """
    if not ds.views:
        raise DimensionMismatchError("dataset has no views")
    n = ds.views[0].shape[1]
    if n < 2:
        raise DimensionMismatchError(f"need at least 2 samples, got n={n}")
    for v, X in enumerate(ds.views):
        if X.shape[1] != n:
            raise DimensionMismatchError(
                f"view {v} has {X.shape[1]} samples, view 0 has {n}"
            )
        if not np.isfinite(X).all():
            bad = np.argwhere(~np.isfinite(X))[0]
            raise NonFiniteEntryError(view=v, row=int(bad[0]), col=int(bad[1]))
    if ds.labels is not None:
        y = ds.labels
        if y.shape != (n,):
            raise LabelRangeError(f"labels have shape {y.shape}, expected ({n},)")
        if y.min() < 0:
            raise LabelRangeError(f"negative label {int(y.min())}")
        k = int(y.max()) + 1
        present = np.unique(y)
        if len(present) != k:
            missing = sorted(set(range(k)) - set(present.tolist()))
            raise LabelRangeError(f"class ids {missing} are unused (ids must be 0..{k - 1})")
    return ds


@dataclass(frozen=True)
class LayerSpec:
    """Layer widths [l_1, ..., l_m], shared across views; l_m is the cluster count."""

    sizes: tuple[int, ...]

    def __init__(self, sizes):
        object.__setattr__(self, "sizes", tuple(int(s) for s in sizes))

    @property
    def depth(self) -> int:
        return len(self.sizes)

    def validate(self, k: int | None = None, min_view_dim: int | None = None) -> "LayerSpec":
        if self.depth < 1:
            raise LayerSpecError("at least one layer is required")
        if any(s < 1 for s in self.sizes):
            raise LayerSpecError(f"layer widths must be >= 1, got {self.sizes}")
        if k is not None and self.sizes[-1] != k:
            raise LayerSpecError(
                f"last layer width {self.sizes[-1]} must equal the cluster count {k}"
            )
        if min_view_dim is not None and self.sizes[0] > min_view_dim:
            raise LayerSpecError(
                f"first layer width {self.sizes[0]} exceeds the smallest view dimension {min_view_dim}"
            )
        return self


@dataclass
class FactorStack:
    """Per-view factors: mappings Z_1..Z_m and nonnegative representations H_1..H_m.

    Z_1 is (d_v, l_1); Z_i is (l_{i-1}, l_i) for i >= 2; H_i is (l_i, n).
    """

    mappings: list[Array]
    representations: list[Array]

    @property
    def depth(self) -> int:
        return len(self.mappings)

    @property
    def top(self) -> Array:
        """Last-layer representation H_m."""
        return self.representations[-1]

    def validate(self, d: int | None = None, n: int | None = None) -> "FactorStack":
        if len(self.mappings) != len(self.representations) or not self.mappings:
            raise MvclustError("mappings and representations must pair up, one per layer")
        rows = d
        for i, (Z, H) in enumerate(zip(self.mappings, self.representations)):
            if rows is not None and Z.shape[0] != rows:
                raise DimensionMismatchError(
                    f"layer {i}: Z has {Z.shape[0]} rows, expected {rows}"
                )
            if H.shape[0] != Z.shape[1]:
                raise DimensionMismatchError(
                    f"layer {i}: Z has {Z.shape[1]} cols but H has {H.shape[0]} rows"
                )
            if n is not None and H.shape[1] != n:
                raise DimensionMismatchError(
                    f"layer {i}: H has {H.shape[1]} samples, expected {n}"
                )
            if not np.isfinite(Z).all() or not np.isfinite(H).all():
                raise MvclustError(f"layer {i}: non-finite factor entries")
            if H.min() < 0:
                raise MvclustError(f"layer {i}: representation has negative entries")
            rows = Z.shape[1]
        return self


@dataclass
class ModelState:
    """Complete optimization state: data views, factor stacks, graph S, weights alpha.

    The view matrices are carried alongside the factors so that update rules
    and the objective can be evaluated from the state alone.
    """

    views: list[Array]
    stacks: list[FactorStack]
    S: Array
    alpha: Array
    beta: float

    def __post_init__(self):
        self.views = [_as_matrix(v) for v in self.views]
        self.S = np.asarray(self.S, dtype=np.float64)
        self.alpha = np.asarray(self.alpha, dtype=np.float64)
        self.beta = float(self.beta)

    @property
    def n(self) -> int:
        return self.views[0].shape[1]

    @property
    def num_views(self) -> int:
        return len(self.views)

    def validate(self) -> "ModelState":
        """Check every state invariant (graph, weights, stacks); raise on violation."""
        n = self.n
        if len(self.stacks) != self.num_views:
            raise DimensionMismatchError("one factor stack per view is required")
        for v, (X, st) in enumerate(zip(self.views, self.stacks)):
            st.validate(d=X.shape[0], n=n)
        if self.S.shape != (n, n):
            raise DimensionMismatchError(f"S has shape {self.S.shape}, expected ({n}, {n})")
        if self.S.min() < 0:
            raise MvclustError(f"S has a negative entry ({self.S.min():.3e})")
        if np.abs(np.diag(self.S)).max() != 0.0:
            raise MvclustError("S has a nonzero diagonal entry")
        row_err = np.abs(self.S.sum(axis=1) - 1.0).max()
        if row_err > ROW_SUM_TOL:
            raise MvclustError(f"S row sums deviate from 1 by {row_err:.3e}")
        if self.alpha.shape != (self.num_views,):
            raise DimensionMismatchError("alpha must have one weight per view")
        if self.alpha.min() < 0:
            raise MvclustError(f"alpha has a negative weight ({self.alpha.min():.3e})")
        if abs(self.alpha.sum() - 1.0) > ALPHA_SUM_TOL:
            raise MvclustError(f"alpha sums to {self.alpha.sum()!r}, expected 1")
        return self


@dataclass
class FitConfig:
    """Settings for one fit: trade-off beta, layer widths, budgets, seed."""

    beta: float
    layers: LayerSpec
    max_outer_iters: int = 150
    pretrain_iters: int = 100
    tol_rel_objective: float = 1e-6
    restarts: int = 1
    rng_seed: int = 0
    # Jacobi-style cross-view coupling: compute each view's cross-view Gram
    # from a pre-sweep snapshot instead of the freshest values.
    use_gram_snapshot: bool = field(default=False)

    def __post_init__(self):
        if not isinstance(self.layers, LayerSpec):
            self.layers = LayerSpec(self.layers)
        self.validate()

    def validate(self) -> "FitConfig":
        if not (self.beta > 0):
            raise MvclustError(f"beta must be positive, got {self.beta}")
        if self.max_outer_iters < 0:
            raise MvclustError("max_outer_iters must be >= 0")
        if self.pretrain_iters < 1:
            raise MvclustError("pretrain_iters must be >= 1")
        if self.tol_rel_objective < 0:
            raise MvclustError("tol_rel_objective must be >= 0")
        if self.restarts < 1:
            raise MvclustError("restarts must be >= 1")
        self.layers.validate()
        return self
