"""Exact samplers of the Moran forest and of related objects.

Three constructions give the same law: the uniform attachment (UA)
construction followed by a uniform relabeling, the backward scan of the
chain's transition pairs, and pruning a uniform rooted tree on ``n - 1``
vertices.  Each has a scalar entry point returning :class:`RootedForest`
objects and a batch entry point returning parent arrays of shape
``(count, n)`` for Monte Carlo work.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import BudgetExceeded, InvalidN, ValidationError
from .forest import RootedForest

DEFAULT_NODE_BUDGET = 10**6


def _check_n(n: int) -> None:
    if n < 2:
        raise InvalidN(f"the Moran forest needs n >= 2, got n={n}")


def _uniform_other(rng: np.random.Generator, excluded: np.ndarray, n: int) -> np.ndarray:
    """Uniform on ``{1..n} minus {excluded}``, elementwise."""
    r = rng.integers(1, n, size=np.shape(excluded))
    return r + (r >= excluded)


def _permutations(rng: np.random.Generator, count: int, n: int) -> np.ndarray:
    base = np.tile(np.arange(1, n + 1, dtype=np.int64), (count, 1))
    return rng.permuted(base, axis=1)


# -- UA construction ---------------------------------------------------------


@dataclass(frozen=True)
class UAForestRecord:
    u: tuple[int, ...]
    sigma: tuple[int, ...]  # sigma[l - 1] is the label of the l-th arrival
    pre_relabel: RootedForest
    forest: RootedForest

    @property
    def n(self) -> int:
        return self.forest.n

    def arrival_index(self, v: int) -> int:
        """Step ``B_v`` at which vertex ``v`` was added."""
        return self.sigma.index(v) + 1

    def steps_remaining(self, v: int) -> int:
        """``L_v = n - B_v``."""
        return self.n - self.arrival_index(v)


def ua_vector(n: int, rng: np.random.Generator, count: int | None = None) -> np.ndarray:
    _check_n(n)
    ell = np.arange(1, n + 1, dtype=np.int64)
    if count is None:
        return _uniform_other(rng, ell, n)
    return _uniform_other(rng, np.broadcast_to(ell, (count, n)), n)


def ua_forest_from_vector(u) -> RootedForest:
    """Pre-relabel forest: ``l`` hangs below ``u[l]`` iff ``u[l] < l``."""
    u = np.asarray(u, dtype=np.int64)
    n = u.shape[0]
    if np.any(u < 1) or np.any(u > n) or np.any(u == np.arange(1, n + 1)):
        raise ValidationError(f"not an attachment vector: {u.tolist()}")
    return RootedForest(n, tuple(kernels.ua_parents(u[None, :])[0].tolist()))


def forest_from_ua(u, sigma) -> RootedForest:
    u = np.asarray(u, dtype=np.int64)[None, :]
    sigma = np.asarray(sigma, dtype=np.int64)[None, :]
    par = kernels.relabel(kernels.ua_parents(u), sigma)
    return RootedForest(u.shape[1], tuple(par[0].tolist()))


def sample_ua(n: int, rng: np.random.Generator) -> UAForestRecord:
    u = ua_vector(n, rng)
    sigma = rng.permutation(np.arange(1, n + 1, dtype=np.int64))
    pre = ua_forest_from_vector(u)
    return UAForestRecord(tuple(u.tolist()), tuple(sigma.tolist()), pre, pre.relabel(sigma))


def ua_batch(n: int, count: int, rng: np.random.Generator) -> np.ndarray:
    u = ua_vector(n, rng, count)
    sigma = _permutations(rng, count, n)
    return kernels.relabel(kernels.ua_parents(u), sigma)


def ua_summary_batch(n: int, count: int, rng: np.random.Generator) -> np.ndarray:
    """Label-free statistics of ``count`` UA forests, see ``kernels.UA_COLUMNS``.

    Vertex 1 sits at a uniform arrival index, which is all the relabeling
    contributes to the statistics tracked here.
    """
    u = ua_vector(n, rng, count)
    b1 = rng.integers(1, n + 1, size=count)
    pick = rng.random(count)
    return kernels.ua_summary(u, b1, pick)


def vertex1_record(rec: UAForestRecord) -> tuple[int, int, int]:
    """``(T1, H1, Ttilde1)``: size of vertex 1's tree, steps since that tree's
    root arrived, and size of the subtree descending from vertex 1."""
    f = rec.forest
    tree = f.tree_of(1)
    first = min(rec.arrival_index(v) for v in tree)
    kids = f.children()
    below, todo = 0, [1]
    while todo:
        v = todo.pop()
        below += 1
        todo.extend(kids[v])
    return len(tree), rec.n - first, below


# -- backward construction ---------------------------------------------------


def _backward_state(count: int, n: int):
    return (
        np.zeros((count, n + 1), dtype=np.int64),
        np.zeros((count, n + 1), dtype=np.int64),
        np.zeros(count, dtype=np.int64),
        np.zeros(count, dtype=np.int64),
    )


def backward_from_pairs(V, W, n: int) -> tuple[RootedForest, int]:
    """Forest at the focal time from pairs listed backwards from it.

    ``(V[t], W[t])`` is the pair ``t`` steps before the focal time; ``W[t]``
    is disconnected and reattached to ``V[t]``.  Returns the forest and the
    number of pairs needed before every vertex had been disconnected.
    """
    V = np.asarray(V, dtype=np.int64)[None, :]
    W = np.asarray(W, dtype=np.int64)[None, :]
    rank, mother, nseen, steps = _backward_state(1, n)
    kernels.backward_consume(V, W, rank, mother, nseen, steps, 0)
    if steps[0] == 0:
        raise ValidationError("pair sequence ends before every vertex was disconnected")
    par = kernels.backward_parents(rank, mother)
    return RootedForest(n, tuple(par[0].tolist())), int(steps[0])


def backward_batch(
    n: int, count: int, rng: np.random.Generator, *, return_steps: bool = False
):
    _check_n(n)
    rank, mother, nseen, steps = _backward_state(count, n)
    chunk = int(math.ceil(n * (math.log(n) + 1.0))) + 16
    todo = np.arange(count)
    offset = 0
    while todo.size:
        V = rng.integers(1, n + 1, size=(todo.size, chunk))
        W = _uniform_other(rng, V, n)
        r, m, s, st = rank[todo], mother[todo], nseen[todo], steps[todo]
        kernels.backward_consume(V, W, r, m, s, st, offset)
        rank[todo], mother[todo], nseen[todo], steps[todo] = r, m, s, st
        todo = todo[st == 0]
        offset += chunk
    par = kernels.backward_parents(rank, mother)
    return (par, steps) if return_steps else par


def sample_backward(n: int, rng: np.random.Generator, *, return_steps: bool = False):
    par, steps = backward_batch(n, 1, rng, return_steps=True)
    f = RootedForest(n, tuple(par[0].tolist()))
    return (f, int(steps[0])) if return_steps else f


# -- uniform rooted trees ----------------------------------------------------


def rooted_tree_from_prufer(word, root: int, m: int) -> RootedForest:
    word = np.asarray(word, dtype=np.int64).reshape(1, max(m - 2, 0))
    par = kernels.prufer_parents(word, np.array([root], dtype=np.int64), m)
    return RootedForest(m, tuple(par[0].tolist()))


def uniform_tree_batch(m: int, count: int, rng: np.random.Generator) -> np.ndarray:
    if m < 1:
        raise InvalidN(f"tree needs m >= 1, got m={m}")
    words = rng.integers(1, m + 1, size=(count, max(m - 2, 0)))
    roots = rng.integers(1, m + 1, size=count)
    return kernels.prufer_parents(words, roots, m)


def sample_uniform_rooted_tree(m: int, rng: np.random.Generator) -> RootedForest:
    return RootedForest(m, tuple(uniform_tree_batch(m, 1, rng)[0].tolist()))


def _prune_and_extend(tree_parents: np.ndarray, attach: np.ndarray) -> np.ndarray:
    """Drop decreasing edges of trees on ``1..n-1`` and hang vertex ``n`` below ``attach``."""
    count, m = tree_parents.shape
    ids = np.arange(1, m + 1, dtype=np.int64)
    kept = np.where(tree_parents < ids, tree_parents, 0)
    return np.concatenate([kept, np.asarray(attach, dtype=np.int64).reshape(count, 1)], axis=1)


def forest_from_uniform_tree(tree: RootedForest, attach: int, sigma) -> RootedForest:
    par = _prune_and_extend(np.asarray([tree.parent], dtype=np.int64), np.array([attach]))
    par = kernels.relabel(par, np.asarray(sigma, dtype=np.int64)[None, :])
    return RootedForest(tree.n + 1, tuple(par[0].tolist()))


def via_uniform_tree_batch(n: int, count: int, rng: np.random.Generator) -> np.ndarray:
    _check_n(n)
    trees = uniform_tree_batch(n - 1, count, rng)
    attach = rng.integers(1, n, size=count)
    sigma = _permutations(rng, count, n)
    return kernels.relabel(_prune_and_extend(trees, attach), sigma)


def sample_via_uniform_tree(n: int, rng: np.random.Generator) -> RootedForest:
    return RootedForest(n, tuple(via_uniform_tree_batch(n, 1, rng)[0].tolist()))


SAMPLERS = {
    "ua": ua_batch,
    "backward": backward_batch,
    "uniform_tree": via_uniform_tree_batch,
}


# -- local weak limit --------------------------------------------------------


@dataclass(frozen=True)
class LocalLimitSample:
    focal_degree: int
    component_size: int


def local_limit_batch(
    count: int,
    rng: np.random.Generator,
    *,
    budget: int = DEFAULT_NODE_BUDGET,
    on_budget: str = "raise",
) -> np.ndarray:
    """``(count, 2)`` array of focal degree and pruned-component size.

    With ``on_budget="censor"`` oversized components are reported as size -1.
    """
    out = kernels.local_limit_batch(int(count), rng, int(budget))
    if on_budget == "raise" and np.any(out[:, 1] < 0):
        raise BudgetExceeded(f"a local-limit component exceeded {budget} nodes")
    return out


def sample_local_limit(rng: np.random.Generator, *, budget: int = DEFAULT_NODE_BUDGET) -> LocalLimitSample:
    deg, size = local_limit_batch(1, rng, budget=budget)[0]
    return LocalLimitSample(int(deg), int(size))
