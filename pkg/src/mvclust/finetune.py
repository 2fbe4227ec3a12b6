"""Per-view factor updates for the joint objective.

Three rules per view: an exact least-squares update of each mapping Z_i, a
multiplicative update of the hidden representations H_i, and a
graph-coupled multiplicative update of the top representation H_m that
pulls the view's Gram similarity toward the consensus graph.

Chain products are recomputed from the current factors for every update
(correctness first); `sweep_view(use_cache=True)` offers an incremental
prefix/suffix path that produces bitwise-identical factors and is validated
against the recompute path in the test suite.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .seminmf import EPS_DENOM, mp_pinv, pos_neg_split
from .types import ModelState

Array = np.ndarray


@dataclass
class ChainCache:
    """Products around layer i of one stack.

    phi : Z_1 ... Z_{i-1} (None for the first layer, meaning identity)
    Phi : Z_1 ... Z_i
    hhat : Z_{i+1} ... Z_m H_m (equals H_m at the top layer)
    """

    phi: Array | None
    Phi: Array | None
    hhat: Array | None

    @classmethod
    def compute(cls, stack, i: int) -> "ChainCache":
        phi = None
        for Z in stack.mappings[:i]:
            phi = Z if phi is None else phi @ Z
        Phi = stack.mappings[i] if phi is None else phi @ stack.mappings[i]
        hhat = stack.top
        for Z in reversed(stack.mappings[i + 1:]):
            hhat = Z @ hhat
        return cls(phi=phi, Phi=Phi, hhat=hhat)

    def check(self, stack, i: int, atol: float = 1e-10) -> None:
        if self.phi is not None and self.Phi is not None:
            assert np.allclose(self.phi @ stack.mappings[i], self.Phi, atol=atol)
        if i == stack.depth - 1 and self.hhat is not None:
            assert self.hhat is stack.top or np.array_equal(self.hhat, stack.top)


def update_mapping(state: ModelState, v: int, i: int, cache: ChainCache | None = None) -> Array:
    """Exact minimizer of ||X - phi Z_i hhat_i||_F over Z_i.

    Z_i = phi^+ X hhat^+ with Moore-Penrose pseudo-inverses (these reduce
    to (phi^T phi)^{-1} phi^T and hhat^T (hhat hhat^T)^{-1} at full rank;
    hhat is low-rank by construction below the top layer, which the SVD
    handles exactly, with a RankDeficientWarning recorded).
    """
    stack = state.stacks[v]
    if cache is None:
        cache = ChainCache.compute(stack, i)
    X = state.views[v]
    widths = [Z.shape[1] for Z in stack.mappings]
    hhat_rank = min(min(widths[i:]), cache.hhat.shape[1])
    right = mp_pinv(cache.hhat, warn_context="update_mapping", expected_rank=hhat_rank)
    if cache.phi is None:
        return X @ right
    # fine-tuned mappings inherit the top layer's rank bound, so the chain's
    # structural rank is the minimum width overall
    phi_rank = min(X.shape[0], min(widths))
    left = mp_pinv(cache.phi, warn_context="update_mapping", expected_rank=phi_rank)
    return (left @ X) @ right


def update_hidden(state: ModelState, v: int, i: int, cache: ChainCache | None = None) -> Array:
    """Multiplicative update of H_i against the prefix product Phi = Z_1..Z_i.

    H_i <- H_i * sqrt(([Phi^T X]+ + [Phi^T Phi]- H_i) /
                      ([Phi^T X]- + [Phi^T Phi]+ H_i))
    The sign split acts on the Gram matrix (see update_representation for
    why). Nonnegativity is preserved exactly; zero entries stay zero. At
    the top layer this is the plain (graph-free) rule used mid-sweep; the
    coupled update is `update_top`.
    """
    stack = state.stacks[v]
    if cache is None:
        cache = ChainCache.compute(stack, i)
    Phi = cache.Phi
    X = state.views[v]
    H = stack.representations[i]
    xp, xm = pos_neg_split(Phi.T @ X)
    gram_p, gram_m = pos_neg_split(Phi.T @ Phi)
    num = xp + gram_m @ H
    den = xm + gram_p @ H
    return H * np.sqrt(num / np.maximum(den, EPS_DENOM))


def _cross_view_gram_product(state: ModelState, v: int, H: Array, tops: list[Array]) -> Array:
    """H @ G where G = sum_{o != v} alpha_o H_o^T H_o, without forming G."""
    HG = np.zeros_like(H)
    for o, (a, Ho) in enumerate(zip(state.alpha, tops)):
        if o == v:
            continue
        HG += a * ((H @ Ho.T) @ Ho)
    return HG


def update_top(state: ModelState, v: int, top_snapshot: list[Array] | None = None) -> Array:
    """Graph-coupled multiplicative update of the top representation H_m.

    Targets ||X - Phi H||_F^2 + beta ||S - alpha_v H^T H - G||_F^2 with
    G the other views' weighted Gram mix. `top_snapshot` supplies the other
    views' H_m values (pre-sweep snapshot mode); by default the freshest
    state values are used.
    """
    stack = state.stacks[v]
    cache = ChainCache.compute(stack, stack.depth - 1)
    Phi = cache.Phi
    X = state.views[v]
    H = stack.top
    S = state.S
    a_v = float(state.alpha[v])
    beta = state.beta
    tops = top_snapshot if top_snapshot is not None else [st.top for st in state.stacks]

    xp, xm = pos_neg_split(Phi.T @ X)
    gram_p, gram_m = pos_neg_split(Phi.T @ Phi)
    # S, G, and H H^T H are all elementwise nonnegative, so the sign split
    # of those products is one-sided; it is kept for robustness to dust
    sp, sm = pos_neg_split(H @ S)
    stp, stm = pos_neg_split(H @ S.T)
    gp, gm = pos_neg_split(2.0 * _cross_view_gram_product(state, v, H, tops))
    qp, qm = pos_neg_split((2.0 * a_v) * ((H @ H.T) @ H))

    num = xp + gram_m @ H + a_v * beta * (sp + stp + gm + qm)
    den = xm + gram_p @ H + a_v * beta * (sm + stm + gp + qp)
    return H * np.sqrt(num / np.maximum(den, EPS_DENOM))


def top_kkt_residual(state: ModelState, v: int) -> float:
    """Complementary-slackness residual of the top-layer update at view v.

    max |[g]- * H^2| for g the half-gradient of the coupled subproblem;
    zero at a KKT point of the nonnegativity-constrained problem.
    """
    stack = state.stacks[v]
    cache = ChainCache.compute(stack, stack.depth - 1)
    Phi = cache.Phi
    X = state.views[v]
    H = stack.top
    a_v = float(state.alpha[v])
    beta = state.beta
    tops = [st.top for st in state.stacks]
    HG = _cross_view_gram_product(state, v, H, tops)
    g = (
        -(Phi.T @ X)
        + (Phi.T @ Phi) @ H
        - a_v * beta * (H @ state.S + H @ state.S.T)
        + 2.0 * a_v * beta * HG
        + 2.0 * (a_v**2) * beta * ((H @ H.T) @ H)
    )
    return float(np.abs(np.minimum(g, 0.0) * H * H).max())


def sweep_view(
    state: ModelState,
    v: int,
    top_snapshot: list[Array] | None = None,
    use_cache: bool = False,
) -> None:
    """One fine-tuning pass over view v: (Z_i, H_i) for every layer in
    order, then the graph-coupled top update. Mutates the view's stack."""
    stack = state.stacks[v]
    m = stack.depth
    if not use_cache:
        for i in range(m):
            stack.mappings[i] = update_mapping(state, v, i)
            stack.representations[i] = update_hidden(state, v, i)
        stack.representations[m - 1] = update_top(state, v, top_snapshot=top_snapshot)
        return

    # incremental path: suffix products from pre-sweep factors, prefix grown
    # with freshly updated mappings; association order matches ChainCache
    suffix: list[Array] = [None] * m
    suffix[m - 1] = stack.top
    for i in range(m - 2, -1, -1):
        suffix[i] = stack.mappings[i + 1] @ suffix[i + 1]
    phi: Array | None = None
    for i in range(m):
        stack.mappings[i] = update_mapping(
            state, v, i, cache=ChainCache(phi=phi, Phi=None, hhat=suffix[i])
        )
        Phi = stack.mappings[i] if phi is None else phi @ stack.mappings[i]
        stack.representations[i] = update_hidden(
            state, v, i, cache=ChainCache(phi=phi, Phi=Phi, hhat=suffix[i])
        )
        phi = Phi
    stack.representations[m - 1] = update_top(state, v, top_snapshot=top_snapshot)
