"""numba-compiled twins of the kernels in ``_numpy``."""
from __future__ import annotations

import numpy as np
from numba import njit

from ._numpy import FOREST_COLUMNS, UA_COLUMNS, relabel, ua_parents  # noqa: F401  (re-exported)


@njit(cache=True, nogil=True)
def forest_summary(parent):
    B, n = parent.shape
    out = np.empty((B, 5), dtype=np.int64)
    root = np.zeros(n + 1, dtype=np.int64)
    size = np.zeros(n + 1, dtype=np.int64)
    deg = np.zeros(n + 1, dtype=np.int64)
    for b in range(B):
        root[:] = 0
        size[:] = 0
        deg[:] = 0
        N = 0
        for v in range(1, n + 1):
            p = parent[b, v - 1]
            if p > 0:
                deg[v] += 1
                deg[p] += 1
            else:
                N += 1
            # follow parents to a vertex with a known root, then compress
            w = v
            while root[w] == 0 and parent[b, w - 1] > 0:
                w = parent[b, w - 1]
            r = root[w] if root[w] > 0 else w
            root[w] = r
            w = v
            while root[w] == 0:
                root[w] = r
                w = parent[b, w - 1]
        dmax = 0
        tmax = 0
        for v in range(1, n + 1):
            size[root[v]] += 1
        for v in range(1, n + 1):
            if deg[v] > dmax:
                dmax = deg[v]
            if size[v] > tmax:
                tmax = size[v]
        out[b, 0] = N
        out[b, 1] = dmax
        out[b, 2] = tmax
        out[b, 3] = deg[1]
        out[b, 4] = size[root[1]]
    return out


@njit(cache=True, nogil=True)
def ua_summary(u, b1, pick):
    B, n = u.shape
    out = np.empty((B, 8), dtype=np.int64)
    par = np.zeros(n + 1, dtype=np.int64)
    root = np.zeros(n + 1, dtype=np.int64)
    size = np.zeros(n + 1, dtype=np.int64)
    deg = np.zeros(n + 1, dtype=np.int64)
    sub = np.zeros(n + 1, dtype=np.int64)
    for b in range(B):
        size[:] = 0
        deg[:] = 0
        N = 0
        for ell in range(1, n + 1):
            p = u[b, ell - 1]
            if p >= ell:
                p = 0
            par[ell] = p
            sub[ell] = 1
            if p == 0:
                root[ell] = ell
                N += 1
            else:
                root[ell] = root[p]
                deg[p] += 1
                deg[ell] += 1
            size[root[ell]] += 1
        for ell in range(n, 0, -1):
            if par[ell] > 0:
                sub[par[ell]] += sub[ell]
        dmax = 0
        tmax = 0
        for v in range(1, n + 1):
            if deg[v] > dmax:
                dmax = deg[v]
            if size[v] > tmax:
                tmax = size[v]
        j = int(np.floor(pick[b] * N))
        if j > N - 1:
            j = N - 1
        tu = 0
        seen = 0
        for ell in range(1, n + 1):
            if par[ell] == 0:
                if seen == j:
                    tu = size[ell]
                    break
                seen += 1
        v1 = b1[b]
        r1 = root[v1]
        out[b, 0] = N
        out[b, 1] = dmax
        out[b, 2] = tmax
        out[b, 3] = deg[v1]
        out[b, 4] = size[r1]
        out[b, 5] = n - r1
        out[b, 6] = sub[v1]
        out[b, 7] = tu
    return out


@njit(cache=True, nogil=True)
def ua_extremes(u):
    B, n = u.shape
    out = np.empty((B, 2), dtype=np.int64)
    root = np.zeros(n + 1, dtype=np.int64)
    size = np.zeros(n + 1, dtype=np.int64)
    deg = np.zeros(n + 1, dtype=np.int64)
    for b in range(B):
        size[:] = 0
        deg[:] = 0
        for ell in range(1, n + 1):
            p = u[b, ell - 1]
            if p < ell:
                root[ell] = root[p]
                deg[p] += 1
                deg[ell] += 1
            else:
                root[ell] = ell
            size[root[ell]] += 1
        dmax = 0
        tmax = 0
        for v in range(1, n + 1):
            if deg[v] > dmax:
                dmax = deg[v]
            if size[v] > tmax:
                tmax = size[v]
        out[b, 0] = dmax
        out[b, 1] = tmax
    return out


@njit(cache=True, nogil=True)
def backward_consume(V, W, rank, mother, nseen, steps, offset):
    B, T = W.shape
    n = rank.shape[1] - 1
    for b in range(B):
        if steps[b] != 0:
            continue
        for t in range(T):
            w = W[b, t]
            if rank[b, w] == 0:
                nseen[b] += 1
                rank[b, w] = nseen[b]
                mother[b, w] = V[b, t]
                if nseen[b] == n:
                    steps[b] = offset + t + 1
                    break


@njit(cache=True, nogil=True)
def backward_parents(rank, mother):
    B = rank.shape[0]
    n = rank.shape[1] - 1
    out = np.zeros((B, n), dtype=np.int64)
    for b in range(B):
        for w in range(1, n + 1):
            m = mother[b, w]
            if rank[b, m] > rank[b, w]:
                out[b, w - 1] = m
    return out


@njit(cache=True, nogil=True)
def prufer_parents(words, roots, m):
    B = roots.shape[0]
    out = np.zeros((B, m), dtype=np.int64)
    parent = np.zeros(m + 1, dtype=np.int64)
    degree = np.zeros(m + 1, dtype=np.int64)
    for b in range(B):
        parent[:] = 0
        if m >= 2:
            degree[:] = 1
            for i in range(m - 2):
                degree[words[b, i]] += 1
            ptr = 1
            while degree[ptr] != 1:
                ptr += 1
            leaf = ptr
            for i in range(m - 2):
                x = words[b, i]
                parent[leaf] = x
                degree[x] -= 1
                if degree[x] == 1 and x < ptr:
                    leaf = x
                else:
                    ptr += 1
                    while degree[ptr] != 1:
                        ptr += 1
                    leaf = ptr
            parent[leaf] = m
        prev = 0
        cur = roots[b]
        while cur != 0:
            nxt = parent[cur]
            parent[cur] = prev
            prev = cur
            cur = nxt
        for v in range(1, m + 1):
            out[b, v - 1] = parent[v]
    return out


@njit(cache=True)
def _local_limit_kernel(count, rng, budget, out):
    stack = np.empty(1024, dtype=np.float64)
    for i in range(count):
        v0 = rng.random()
        kids = rng.poisson(1.0 - v0)
        v1 = rng.random()
        degree = kids + (1 if v1 < v0 else 0)
        size = 1
        top = 0
        for _ in range(kids):
            if top == stack.shape[0]:
                stack = np.concatenate((stack, np.empty(stack.shape[0], dtype=np.float64)))
            stack[top] = v0 + (1.0 - v0) * rng.random()
            top += 1
        s = v0
        nxt = v1
        while nxt < s and size <= budget:
            size += 1
            s = nxt
            c = rng.poisson(1.0 - s)
            for _ in range(c):
                if top == stack.shape[0]:
                    stack = np.concatenate((stack, np.empty(stack.shape[0], dtype=np.float64)))
                stack[top] = s + (1.0 - s) * rng.random()
                top += 1
            nxt = rng.random()
        while top > 0 and size <= budget:
            top -= 1
            mk = stack[top]
            size += 1
            c = rng.poisson(1.0 - mk)
            for _ in range(c):
                if top == stack.shape[0]:
                    stack = np.concatenate((stack, np.empty(stack.shape[0], dtype=np.float64)))
                stack[top] = mk + (1.0 - mk) * rng.random()
                top += 1
        out[i, 0] = degree
        out[i, 1] = size if size <= budget else -1


def local_limit_batch(count: int, rng: np.random.Generator, budget: int) -> np.ndarray:
    out = np.empty((count, 2), dtype=np.int64)
    _local_limit_kernel(count, rng, budget, out)
    return out
