"""Bijection between attachment vectors and rooted labeled trees.

Vectors are indexed by ``l = 2..n-1`` and stored as tuples of length
``n - 2`` (entry ``i`` holds ``u_{i+2}``).

* ``theta`` maps restricted vectors (``u_l`` in ``{1..n} \\ {l}``) to
  compressed vectors (``u_l`` in ``{1..n-1}``) by lowering entries above ``l``.
* ``psi`` reads a compressed vector as the functional digraph ``u_l -> l`` on
  ``{1..n-1}`` and turns its cycles into a path ending at vertex 1, yielding a
  rooted tree whose increasing edges are exactly the pairs ``u_l < l``.
* ``phi = psi . theta``.
"""
from __future__ import annotations

import itertools
from typing import Iterator, Sequence

from .errors import RangeError
from .forest import RootedForest


def _n_of(u: Sequence[int], n: int | None) -> int:
    return len(u) + 2 if n is None else n


def theta(u: Sequence[int], n: int | None = None) -> tuple[int, ...]:
    n = _n_of(u, n)
    if len(u) != n - 2:
        raise RangeError(f"expected {n - 2} entries, got {len(u)}")
    out = []
    for ell, x in enumerate(u, start=2):
        if not 1 <= x <= n or x == ell:
            raise RangeError(f"u_{ell} = {x} not in {{1..{n}}} minus {{{ell}}}")
        out.append(x - 1 if x > ell else x)
    return tuple(out)


def theta_inv(v: Sequence[int], n: int | None = None) -> tuple[int, ...]:
    n = _n_of(v, n)
    _check_compressed(v, n)
    return tuple(x if x < ell else x + 1 for ell, x in enumerate(v, start=2))


def _check_compressed(v: Sequence[int], n: int) -> None:
    if len(v) != n - 2:
        raise RangeError(f"expected {n - 2} entries, got {len(v)}")
    for ell, x in enumerate(v, start=2):
        if not 1 <= x <= n - 1:
            raise RangeError(f"entry for {ell} is {x}, outside 1..{n - 1}")


def cycles(v: Sequence[int], n: int | None = None) -> list[tuple[int, ...]]:
    """Cycles of the digraph with edges ``v_l -> l``.

    Each cycle starts at its largest element and follows the edges; cycles are
    sorted by that largest element.
    """
    n = _n_of(v, n)
    _check_compressed(v, n)
    m = n - 1
    pred = [0, 0] + list(v)  # pred[l] = v_l, the tail of the edge into l
    stamp = [0] * (m + 1)
    found = []
    for start in range(2, m + 1):
        if stamp[start]:
            continue
        walk = []
        x = start
        while x != 1 and not stamp[x]:
            stamp[x] = start
            walk.append(x)
            x = pred[x]
        if x != 1 and stamp[x] == start:
            # x is on a new cycle; walk backwards from x collects it in reverse
            back = walk[walk.index(x):]
            top = max(back)
            k = back.index(top)
            back = back[k:] + back[:k]
            found.append((top, *reversed(back[1:])))
    found.sort(key=lambda c: c[0])
    return found


def cycle_word(v: Sequence[int], n: int | None = None) -> tuple[int, ...]:
    """Concatenation ``(1) C_1 ... C_k`` of the cycle notation."""
    return (1, *itertools.chain.from_iterable(cycles(v, n)))


def psi(v: Sequence[int], n: int | None = None) -> RootedForest:
    n = _n_of(v, n)
    cyc = cycles(v, n)
    m = n - 1
    parent = [0, 0] + list(v)  # parent[l] for l >= 2; vertex 1 starts as root
    prev_s = 1
    for c in cyc:
        top, s = c[0], (c[1] if len(c) > 1 else c[0])
        # remove top -> s, add top -> previous s
        parent[s] = 0
        parent[prev_s] = top
        prev_s = s
    return RootedForest(m, tuple(parent[1:]))


def root_path(tree: RootedForest) -> tuple[int, ...]:
    """Vertices met walking from vertex 1 up to the root."""
    path = [1]
    while tree.parent[path[-1] - 1]:
        path.append(tree.parent[path[-1] - 1])
    return tuple(path)


def psi_inv(tree: RootedForest) -> tuple[int, ...]:
    m = tree.n
    parent = [0] + list(tree.parent)
    path = root_path(tree)
    out = parent[:]
    # left-to-right maxima of the path split it into 1, then m_i ... s_i blocks
    starts = [i for i, x in enumerate(path) if x == max(path[: i + 1])]
    bounds = starts[1:] + [len(path)]
    for a, b in zip(starts[1:], bounds[1:]):
        out[path[b - 1]] = path[a]  # restore m_i -> s_i
    return tuple(out[2 : m + 1])


def phi(u: Sequence[int], n: int | None = None) -> RootedForest:
    n = _n_of(u, n)
    return psi(theta(u, n), n)


def phi_inv(tree: RootedForest) -> tuple[int, ...]:
    return theta_inv(psi_inv(tree), tree.n + 1)


def restricted_vectors(n: int) -> Iterator[tuple[int, ...]]:
    """All of ``{1..n} \\ {l}`` for ``l = 2..n-1``, lexicographically."""
    choices = [[x for x in range(1, n + 1) if x != ell] for ell in range(2, n)]
    return itertools.product(*choices)


def compressed_vectors(n: int) -> Iterator[tuple[int, ...]]:
    return itertools.product(range(1, n), repeat=n - 2)


def increasing_pairs(u: Sequence[int]) -> frozenset:
    return frozenset((x, ell) for ell, x in enumerate(u, start=2) if x < ell)
