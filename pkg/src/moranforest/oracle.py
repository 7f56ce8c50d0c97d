"""Brute-force ground truth for tiny ``n``.

Nothing here uses floats or the vectorized kernels: the uniform attachment
law is enumerated outcome by outcome, the chain's stationary law is solved by
exact Gaussian elimination, and rooted trees are counted from Prüfer words
with a decoder private to this module.  The ``*_core_exact`` functions push
every random input of a sampler's deterministic core through that core, so
the samplers can be compared against the same ground truth.
"""
from __future__ import annotations

import itertools
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Mapping

from .errors import InvalidN, SolverDegenerate, TooLarge, ValidationError
from .forest import RootedForest
from .pmf import Pmf

Parents = tuple  # 1-based parent array, 0 for roots


@dataclass(frozen=True)
class ExactForestDistribution:
    n: int
    probs: Mapping[Parents, Fraction]

    def __post_init__(self):
        total = sum(self.probs.values())
        if total != 1:
            raise ValidationError(f"probabilities sum to {total}")

    @classmethod
    def from_counts(cls, n: int, counts: Mapping[Parents, int]) -> "ExactForestDistribution":
        total = sum(counts.values())
        return cls(n, {k: Fraction(c, total) for k, c in counts.items() if c})

    def __len__(self) -> int:
        return len(self.probs)

    def __getitem__(self, parents: Parents) -> Fraction:
        return self.probs.get(tuple(parents), Fraction(0))

    def forests(self) -> list[RootedForest]:
        return [RootedForest(self.n, p) for p in sorted(self.probs)]

    def tv(self, other: "ExactForestDistribution") -> Fraction:
        keys = set(self.probs) | set(other.probs)
        return sum((abs(self[k] - other[k]) for k in keys), Fraction(0)) / 2

    def relabeled(self, sigma) -> "ExactForestDistribution":
        out = {}
        for p, w in self.probs.items():
            out[_relabel(p, sigma)] = w
        return ExactForestDistribution(self.n, out)


# -- helpers on raw parent tuples --------------------------------------------------


def _is_acyclic(parent: Parents) -> bool:
    n = len(parent)
    for v in range(1, n + 1):
        x, hops = v, 0
        while parent[x - 1]:
            x = parent[x - 1]
            hops += 1
            if hops > n:
                return False
    return True


def _relabel(parent: Parents, sigma) -> Parents:
    out = [0] * len(parent)
    for v, p in enumerate(parent, start=1):
        out[sigma[v - 1] - 1] = sigma[p - 1] if p else 0
    return tuple(out)


def _moran_move(parent: Parents, u: int, v: int) -> Parents:
    out = [0 if (w == v or p == v) else p for w, p in enumerate(parent, start=1)]
    out[v - 1] = u
    return tuple(out)


def enumerate_forests(n: int, *, nonempty: bool = True) -> list[Parents]:
    """All rooted forests on ``1..n`` as parent tuples, in lexicographic order."""
    if n < 1:
        raise InvalidN(f"need n >= 1, got {n}")
    if n > 6:
        raise TooLarge(f"forest enumeration is limited to n <= 6, got {n}")
    out = []
    choices = [[p for p in range(n + 1) if p != v] for v in range(1, n + 1)]
    for parent in itertools.product(*choices):
        if nonempty and not any(parent):
            continue
        if _is_acyclic(parent):
            out.append(parent)
    return out


# -- uniform attachment, enumerated ---------------------------------------------------


def ua_exact(n: int) -> ExactForestDistribution:
    """Exact law of the relabeled uniform attachment forest."""
    if n < 2:
        raise InvalidN(f"need n >= 2, got {n}")
    if n > 5:
        raise TooLarge(f"ua_exact is limited to n <= 5, got {n}")
    pre = Counter()
    choices = [[x for x in range(1, n + 1) if x != ell] for ell in range(1, n + 1)]
    for u in itertools.product(*choices):
        pre[tuple(x if x < ell else 0 for ell, x in enumerate(u, start=1))] += 1
    counts = Counter()
    for sigma in itertools.permutations(range(1, n + 1)):
        for p, c in pre.items():
            counts[_relabel(p, sigma)] += c
    return ExactForestDistribution.from_counts(n, counts)


# -- stationary law of the chain ------------------------------------------------------


def transition_kernel(n: int) -> tuple[list[Parents], list[dict[int, int]]]:
    """States and integer transition counts (each row sums to ``n (n - 1)``)."""
    states = enumerate_forests(n)
    index = {s: i for i, s in enumerate(states)}
    rows = []
    for s in states:
        row: dict[int, int] = {}
        for u in range(1, n + 1):
            for v in range(1, n + 1):
                if u == v:
                    continue
                t = _moran_move(s, u, v)
                if t not in index:
                    raise SolverDegenerate(f"move ({u},{v}) leaves the forest class from {s}")
                j = index[t]
                row[j] = row.get(j, 0) + 1
        if sum(row.values()) != n * (n - 1):
            raise SolverDegenerate("kernel row is not stochastic")
        rows.append(row)
    return states, rows


def _solve_exact(a: list[list[Fraction]], b: list[Fraction]) -> list[Fraction]:
    """Gauss-Jordan elimination for a consistent system with more rows than columns."""
    rows = [r[:] + [bi] for r, bi in zip(a, b)]
    ncol = len(a[0])
    pivot_row = 0
    for col in range(ncol):
        pr = next((r for r in range(pivot_row, len(rows)) if rows[r][col] != 0), None)
        if pr is None:
            raise SolverDegenerate(f"no pivot in column {col}")
        rows[pivot_row], rows[pr] = rows[pr], rows[pivot_row]
        piv = rows[pivot_row]
        inv = 1 / piv[col]
        for j in range(col, ncol + 1):
            piv[j] *= inv
        for r in range(len(rows)):
            if r != pivot_row and rows[r][col] != 0:
                f = rows[r][col]
                row = rows[r]
                for j in range(col, ncol + 1):
                    if piv[j]:
                        row[j] -= f * piv[j]
        pivot_row += 1
    for r in rows[pivot_row:]:
        if r[-1] != 0:
            raise SolverDegenerate("inconsistent stationary system")
    return [rows[i][-1] for i in range(ncol)]


def stationary_solve(n: int) -> ExactForestDistribution:
    """Stationary law of the chain on non-empty forests, solved exactly."""
    if n < 2:
        raise InvalidN(f"need n >= 2, got {n}")
    if n > 4:
        raise TooLarge(f"stationary_solve is limited to n <= 4, got {n}")
    states, rows = transition_kernel(n)
    size = len(states)
    total = n * (n - 1)
    # equations: sum_i pi_i K[i][j] - total * pi_j = 0, then sum pi = 1
    a = [[Fraction(0)] * size for _ in range(size)]
    for i, row in enumerate(rows):
        for j, c in row.items():
            a[j][i] += c
    for j in range(size):
        a[j][j] -= total
    a.append([Fraction(1)] * size)
    b = [Fraction(0)] * size + [Fraction(1)]
    pi = _solve_exact(a, b)
    if any(p < 0 for p in pi):
        raise SolverDegenerate("negative stationary weight")
    return ExactForestDistribution(n, {s: p for s, p in zip(states, pi) if p})


# -- rooted trees by increasing edges ------------------------------------------------


def _decode_prufer(word: tuple[int, ...], m: int) -> list[tuple[int, int]]:
    """Undirected edges of the tree with Prüfer word ``word``, quadratic-time decode."""
    degree = [1] * (m + 1)
    for x in word:
        degree[x] += 1
    edges = []
    for x in word:
        leaf = min(v for v in range(1, m + 1) if degree[v] == 1)
        edges.append((leaf, x))
        degree[leaf] -= 1
        degree[x] -= 1
    last = [v for v in range(1, m + 1) if degree[v] == 1]
    if m >= 2:
        edges.append((last[0], last[1]))
    return edges


def _orient(edges: list[tuple[int, int]], root: int, m: int) -> list[int]:
    adj = {v: [] for v in range(1, m + 1)}
    for a, b in edges:
        adj[a].append(b)
        adj[b].append(a)
    parent = [0] * (m + 1)
    seen = {root}
    todo = [root]
    while todo:
        v = todo.pop()
        for w in adj[v]:
            if w not in seen:
                seen.add(w)
                parent[w] = v
                todo.append(w)
    return parent[1:]


def rooted_trees(m: int) -> Iterable[Parents]:
    """Every rooted tree on ``1..m`` exactly once, via Prüfer words and a root."""
    if m < 1:
        raise InvalidN(f"need m >= 1, got {m}")
    if m > 7:
        raise TooLarge(f"rooted tree enumeration is limited to m <= 7, got {m}")
    return (
        tuple(_orient(edges, root, m))
        for edges in map(lambda w: _decode_prufer(w, m),
                         itertools.product(range(1, m + 1), repeat=max(m - 2, 0)))
        for root in range(1, m + 1)
    )


def count_trees_by_increasing_edges(m: int) -> tuple[int, ...]:
    table = [0] * m
    for parent in rooted_trees(m):
        k = sum(1 for v, p in enumerate(parent, start=1) if p and p < v)
        table[k] += 1
    return tuple(table)


# -- marginals ----------------------------------------------------------------------


def _num_trees(f: RootedForest) -> int:
    return len(f.roots)


def _tree1(f: RootedForest) -> int:
    return len(f.tree_of(1))


def _max_tree(f: RootedForest) -> int:
    return max(Counter(f.root_of(v) for v in range(1, f.n + 1)).values())


STATISTICS: dict[str, Callable[[RootedForest], int]] = {
    "num_trees": _num_trees,
    "num_edges": lambda f: f.num_edges,
    "degree1": lambda f: f.degree(1),
    "tree1": _tree1,
    "max_degree": lambda f: max(f.degree(v) for v in range(1, f.n + 1)),
    "max_tree_size": _max_tree,
}


def marginal(dist: ExactForestDistribution, statistic) -> Pmf:
    """Exact law of ``statistic`` (a name from ``STATISTICS`` or a callable)."""
    f = STATISTICS[statistic] if isinstance(statistic, str) else statistic
    table: dict[int, Fraction] = {}
    for parent, w in dist.probs.items():
        k = int(f(RootedForest(dist.n, parent)))
        table[k] = table.get(k, Fraction(0)) + w
    return Pmf.from_mapping(table, exact=True)


def is_exchangeable(dist: ExactForestDistribution) -> bool:
    for sigma in itertools.permutations(range(1, dist.n + 1)):
        if dist.relabeled(sigma).probs != dist.probs:
            return False
    return True


# -- exhaustive runs of the samplers' deterministic cores -------------------------------


def ua_core_exact(n: int) -> ExactForestDistribution:
    from .samplers import forest_from_ua

    if n > 4:
        raise TooLarge("core enumeration is limited to n <= 4")
    counts = Counter()
    choices = [[x for x in range(1, n + 1) if x != ell] for ell in range(1, n + 1)]
    for u in itertools.product(*choices):
        for sigma in itertools.permutations(range(1, n + 1)):
            counts[forest_from_ua(u, sigma).parent] += 1
    return ExactForestDistribution.from_counts(n, counts)


def backward_core_exact(n: int) -> ExactForestDistribution:
    """Only pairs that disconnect a not-yet-seen vertex affect the output; each
    such pair is uniform over (unseen vertex, any other vertex), so every
    ordering of first disconnections with every choice of mothers is equally
    likely."""
    from .samplers import backward_from_pairs

    if n > 4:
        raise TooLarge("core enumeration is limited to n <= 4")
    counts = Counter()
    for order in itertools.permutations(range(1, n + 1)):
        mothers = [[x for x in range(1, n + 1) if x != w] for w in order]
        for V in itertools.product(*mothers):
            forest, steps = backward_from_pairs(V, order, n)
            assert steps == n
            counts[forest.parent] += 1
    return ExactForestDistribution.from_counts(n, counts)


def uniform_tree_core_exact(n: int) -> ExactForestDistribution:
    from .samplers import forest_from_uniform_tree, rooted_tree_from_prufer

    if n > 4:
        raise TooLarge("core enumeration is limited to n <= 4")
    m = n - 1
    counts = Counter()
    for word in itertools.product(range(1, m + 1), repeat=max(m - 2, 0)):
        for root in range(1, m + 1):
            tree = rooted_tree_from_prufer(word, root, m)
            for attach in range(1, n):
                for sigma in itertools.permutations(range(1, n + 1)):
                    counts[forest_from_uniform_tree(tree, attach, sigma).parent] += 1
    return ExactForestDistribution.from_counts(n, counts)


CORE_EXACT = {
    "ua": ua_core_exact,
    "backward": backward_core_exact,
    "uniform_tree": uniform_tree_core_exact,
}


def expected_support_size(n: int) -> int:
    """Non-empty rooted forests on ``n`` labeled vertices."""
    return (n + 1) ** (n - 1) - 1
