"""Pure-numpy kernels.

Each function matches its twin in ``_numba`` output for output, except
``local_limit_batch`` which consumes randomness in a different order (the
laws agree, the streams do not).
"""
from __future__ import annotations

import heapq

import numpy as np

# column layout of ua_summary
UA_COLUMNS = ("N", "Dmax", "Tmax", "deg1", "T1", "H1", "Ttilde1", "TU")
# column layout of forest_summary
FOREST_COLUMNS = ("N", "Dmax", "Tmax", "deg1", "T1")


def _roots(parent: np.ndarray) -> np.ndarray:
    """Root label of every vertex, by pointer jumping (1-based, 0 = no parent)."""
    n = parent.shape[1]
    ids = np.broadcast_to(np.arange(1, n + 1, dtype=np.int64), parent.shape)
    root = np.where(parent > 0, parent, ids)
    while True:
        nxt = np.take_along_axis(root, root - 1, axis=1)
        if np.array_equal(nxt, root):
            return root
        root = nxt


def _row_counts(labels: np.ndarray, mask: np.ndarray | None = None) -> np.ndarray:
    """``out[b, x - 1] = #{j : labels[b, j] == x}`` for labels in ``1..n``."""
    B, n = labels.shape
    flat = labels - 1 + (np.arange(B, dtype=np.int64) * n)[:, None]
    if mask is not None:
        flat = flat[mask]
    return np.bincount(flat.ravel(), minlength=B * n).reshape(B, n)


def forest_summary(parent: np.ndarray) -> np.ndarray:
    parent = np.asarray(parent, dtype=np.int64)
    B, n = parent.shape
    rows = np.arange(B)
    has_parent = parent > 0
    root = _roots(parent)
    sizes = _row_counts(root)
    deg = _row_counts(np.where(has_parent, parent, 1), has_parent) + has_parent
    out = np.empty((B, len(FOREST_COLUMNS)), dtype=np.int64)
    out[:, 0] = n - has_parent.sum(axis=1)
    out[:, 1] = deg.max(axis=1)
    out[:, 2] = sizes.max(axis=1)
    out[:, 3] = deg[:, 0]
    out[:, 4] = sizes[rows, root[:, 0] - 1]
    return out


def ua_parents(u: np.ndarray) -> np.ndarray:
    u = np.asarray(u, dtype=np.int64)
    ell = np.arange(1, u.shape[1] + 1, dtype=np.int64)
    return np.where(u < ell, u, 0)


def ua_summary(u: np.ndarray, b1: np.ndarray, pick: np.ndarray) -> np.ndarray:
    """Per-forest statistics of UA forests given in arrival order.

    ``b1`` is the arrival index of the tracked vertex, ``pick`` a uniform
    variate used to choose one tree uniformly among the roots.
    """
    par = ua_parents(u)
    B, n = par.shape
    rows = np.arange(B)
    b1 = np.asarray(b1, dtype=np.int64)
    has_parent = par > 0
    root = _roots(par)
    sizes = _row_counts(root)
    deg = _row_counts(np.where(has_parent, par, 1), has_parent) + has_parent
    N = n - has_parent.sum(axis=1)

    is_root = ~has_parent
    rank = np.cumsum(is_root, axis=1)
    j = np.minimum(np.floor(np.asarray(pick) * N).astype(np.int64), N - 1)
    chosen = np.argmax(is_root & (rank == (j + 1)[:, None]), axis=1)

    r1 = root[rows, b1 - 1]
    # descendants of b1: vertices whose ancestor chain passes through b1
    ids = np.broadcast_to(np.arange(1, n + 1, dtype=np.int64), par.shape)
    cur = np.where(ids > b1[:, None], ids, 0)
    while True:
        move = cur > b1[:, None]
        if not move.any():
            break
        up = np.take_along_axis(par, np.maximum(cur - 1, 0), axis=1)
        cur = np.where(move, up, cur)
    ttilde = 1 + (cur == b1[:, None]).sum(axis=1)

    out = np.empty((B, len(UA_COLUMNS)), dtype=np.int64)
    out[:, 0] = N
    out[:, 1] = deg.max(axis=1)
    out[:, 2] = sizes.max(axis=1)
    out[:, 3] = deg[rows, b1 - 1]
    out[:, 4] = sizes[rows, r1 - 1]
    out[:, 5] = n - r1
    out[:, 6] = ttilde
    out[:, 7] = sizes[rows, chosen]
    return out


def ua_extremes(u: np.ndarray) -> np.ndarray:
    """``(Dmax, Tmax)`` per row; cheaper than the full summary for huge ``n``."""
    par = ua_parents(u)
    has_parent = par > 0
    sizes = _row_counts(_roots(par))
    deg = _row_counts(np.where(has_parent, par, 1), has_parent) + has_parent
    return np.stack([deg.max(axis=1), sizes.max(axis=1)], axis=1)


def backward_consume(V, W, rank, mother, nseen, steps, offset):
    """Feed a chunk of pairs ``(V[b, t], W[b, t])`` to each sample's backward scan.

    ``rank[b, w]`` is the order in which ``w`` was first seen as a disconnected
    vertex (1 = most recent birth, 0 = not seen yet), ``mother[b, w]`` the vertex
    it was attached to then.  Arrays use index ``w`` directly (column 0 unused).
    ``steps[b]`` is set to the number of pairs consumed once every vertex is seen.
    Mutates the state arrays in place.
    """
    B, T = W.shape
    n = rank.shape[1] - 1
    keys = (np.arange(B, dtype=np.int64)[:, None] * (n + 1) + W).ravel()
    uniq, first = np.unique(keys, return_index=True)
    b = uniq // (n + 1)
    w = uniq % (n + 1)
    pos = first % T
    fresh = (rank[b, w] == 0) & (steps[b] == 0)
    b, w, pos = b[fresh], w[fresh], pos[fresh]
    order = np.lexsort((pos, b))
    b, w, pos = b[order], w[order], pos[order]
    if b.size:
        starts = np.r_[0, np.flatnonzero(np.diff(b)) + 1]
        within = np.arange(b.size) - np.repeat(starts, np.diff(np.r_[starts, b.size]))
        rank[b, w] = nseen[b] + within + 1
        mother[b, w] = V[b, pos]
        last = np.r_[starts[1:], b.size] - 1
        nseen[b[last]] += within[last] + 1
        done = nseen[b[last]] == n
        steps[b[last][done]] = offset + pos[last][done] + 1


def backward_parents(rank: np.ndarray, mother: np.ndarray) -> np.ndarray:
    m = mother[:, 1:]
    rw = rank[:, 1:]
    rm = np.take_along_axis(rank, m, axis=1)
    return np.where(rm > rw, m, 0)


def prufer_parents(words: np.ndarray, roots: np.ndarray, m: int) -> np.ndarray:
    """Rooted trees on ``1..m`` from Prüfer words (length ``m - 2``) and roots."""
    words = np.asarray(words, dtype=np.int64)
    roots = np.asarray(roots, dtype=np.int64)
    out = np.zeros((roots.shape[0], m), dtype=np.int64)
    for b in range(roots.shape[0]):
        out[b] = _prufer_one(words[b], int(roots[b]), m)
    return out


def _prufer_one(word, root: int, m: int) -> np.ndarray:
    parent = np.zeros(m + 1, dtype=np.int64)
    if m >= 2:
        degree = [1] * (m + 1)
        for x in word:
            degree[x] += 1
        leaves = [v for v in range(1, m + 1) if degree[v] == 1]
        heapq.heapify(leaves)
        for x in word:
            leaf = heapq.heappop(leaves)
            parent[leaf] = x
            degree[x] -= 1
            if degree[x] == 1:
                heapq.heappush(leaves, int(x))
        # two vertices remain, the larger one is m
        parent[heapq.heappop(leaves)] = m
    # re-root: reverse the path from root to m
    prev, cur = 0, root
    while cur:
        nxt = parent[cur]
        parent[cur] = prev
        prev, cur = cur, nxt
    return parent[1:]


def relabel(parent: np.ndarray, sigma: np.ndarray) -> np.ndarray:
    """Row-wise relabeling: vertex ``v`` becomes ``sigma[b, v - 1]``."""
    parent = np.asarray(parent, dtype=np.int64)
    sigma = np.asarray(sigma, dtype=np.int64)
    has = parent > 0
    mapped = np.where(has, np.take_along_axis(sigma, np.maximum(parent - 1, 0), axis=1), 0)
    out = np.zeros_like(parent)
    np.put_along_axis(out, sigma - 1, mapped, axis=1)
    return out


def local_limit_batch(count: int, rng: np.random.Generator, budget: int) -> np.ndarray:
    """Focal degree and pruned-component size for ``count`` local-limit draws.

    Generations of the pruned component are expanded for all draws at once.
    Size ``-1`` flags a draw whose component outgrew ``budget``.
    """
    v0 = rng.random(count)
    kids = rng.poisson(1.0 - v0)
    v1 = rng.random(count)
    degree = kids + (v1 < v0)
    size = np.ones(count, dtype=np.int64)
    over = np.zeros(count, dtype=bool)

    # frontier: (owner, mark, number of kept children still to generate)
    f_owner = np.arange(count)
    f_mark = v0
    f_cnt = kids
    spine_idx = np.flatnonzero(v1 < v0)
    spine_mark = v1[spine_idx]
    while f_owner.size or spine_idx.size:
        if spine_idx.size:
            size[spine_idx] += 1
            c = rng.poisson(1.0 - spine_mark)
            f_owner = np.r_[f_owner, spine_idx]
            f_mark = np.r_[f_mark, spine_mark]
            f_cnt = np.r_[f_cnt, c]
            nxt = rng.random(spine_idx.size)
            keep = nxt < spine_mark
            spine_idx, spine_mark = spine_idx[keep], nxt[keep]
        if f_owner.size:
            owner = np.repeat(f_owner, f_cnt)
            lo = np.repeat(f_mark, f_cnt)
            mark = lo + (1.0 - lo) * rng.random(owner.size)
            size += np.bincount(owner, minlength=count)
            f_owner, f_mark = owner, mark
            f_cnt = rng.poisson(1.0 - mark)
        over |= size > budget
        if over.any():
            alive = ~over[f_owner]
            f_owner, f_mark, f_cnt = f_owner[alive], f_mark[alive], f_cnt[alive]
            alive = ~over[spine_idx]
            spine_idx, spine_mark = spine_idx[alive], spine_mark[alive]
    size[over] = -1
    return np.stack([degree, size], axis=1)
