"""Labeled directed graphs, rooted forests and their per-forest statistics.

Vertices are labeled ``1..n``.  A rooted forest is stored as a parent map in
which ``parent[v - 1] == u`` encodes the edge ``u -> v`` (mother to daughter)
and ``0`` marks a root.  The text format is the same array, prefixed by ``n``.
"""
from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .errors import CycleDetected, MultipleParents, ParseError, ValidationError


@dataclass(frozen=True)
class DirectedGraph:
    n: int
    edges: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        if self.n < 1:
            raise ValidationError(f"graph needs at least one vertex, got n={self.n}")
        edges = frozenset((int(u), int(v)) for u, v in self.edges)
        for u, v in edges:
            if u == v:
                raise ValidationError(f"self-loop at {u}")
            if not (1 <= u <= self.n and 1 <= v <= self.n):
                raise ValidationError(f"edge ({u}, {v}) outside 1..{self.n}")
        object.__setattr__(self, "edges", edges)

    @classmethod
    def empty(cls, n: int) -> "DirectedGraph":
        return cls(n, frozenset())

    @classmethod
    def complete(cls, n: int) -> "DirectedGraph":
        return cls(n, frozenset((u, v) for u in range(1, n + 1) for v in range(1, n + 1) if u != v))

    def in_degree(self, v: int) -> int:
        return sum(1 for _, w in self.edges if w == v)

    def is_forest(self) -> bool:
        try:
            validate_forest(self)
        except ValidationError:
            return False
        return True


@dataclass(frozen=True)
class RootedForest:
    n: int
    parent: tuple

    def __post_init__(self):
        parent = tuple(int(p) for p in self.parent)
        if len(parent) != self.n:
            raise ValidationError(f"parent array has {len(parent)} entries, expected {self.n}")
        for v, p in enumerate(parent, start=1):
            if not 0 <= p <= self.n:
                raise ValidationError(f"parent of {v} is {p}, outside 0..{self.n}")
            if p == v:
                raise CycleDetected(f"vertex {v} is its own parent")
        object.__setattr__(self, "parent", parent)
        _check_acyclic(parent)

    @classmethod
    def from_parents(cls, parents: Sequence[int]) -> "RootedForest":
        return cls(len(parents), tuple(parents))

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]]) -> "RootedForest":
        return validate_forest(DirectedGraph(n, frozenset(edges)))

    @classmethod
    def edgeless(cls, n: int) -> "RootedForest":
        return cls(n, (0,) * n)

    def parent_of(self, v: int) -> int | None:
        p = self.parent[v - 1]
        return p or None

    @property
    def roots(self) -> tuple[int, ...]:
        return tuple(v for v, p in enumerate(self.parent, start=1) if p == 0)

    @property
    def edges(self) -> frozenset:
        return frozenset((p, v) for v, p in enumerate(self.parent, start=1) if p)

    @property
    def num_edges(self) -> int:
        return sum(1 for p in self.parent if p)

    def children(self) -> dict[int, list[int]]:
        kids: dict[int, list[int]] = {v: [] for v in range(1, self.n + 1)}
        for v, p in enumerate(self.parent, start=1):
            if p:
                kids[p].append(v)
        return kids

    def root_of(self, v: int) -> int:
        while self.parent[v - 1]:
            v = self.parent[v - 1]
        return v

    def root_map(self) -> list[int]:
        """``root_map()[v - 1]`` is the root of the tree containing ``v``."""
        root = [0] * self.n
        for v in range(1, self.n + 1):
            path = []
            w = v
            while root[w - 1] == 0 and self.parent[w - 1]:
                path.append(w)
                w = self.parent[w - 1]
            r = root[w - 1] or w
            root[w - 1] = r
            for x in path:
                root[x - 1] = r
        return root

    def tree_of(self, v: int) -> frozenset:
        roots = self.root_map()
        r = roots[v - 1]
        return frozenset(w for w in range(1, self.n + 1) if roots[w - 1] == r)

    def in_degrees(self) -> tuple[int, ...]:
        return tuple(1 if p else 0 for p in self.parent)

    def out_degrees(self) -> tuple[int, ...]:
        out = [0] * self.n
        for p in self.parent:
            if p:
                out[p - 1] += 1
        return tuple(out)

    def degree(self, v: int) -> int:
        return (1 if self.parent[v - 1] else 0) + sum(1 for p in self.parent if p == v)

    def relabel(self, sigma: Sequence[int]) -> "RootedForest":
        """Rename vertex ``v`` to ``sigma[v - 1]``."""
        new = [0] * self.n
        for v, p in enumerate(self.parent, start=1):
            new[sigma[v - 1] - 1] = sigma[p - 1] if p else 0
        return RootedForest(self.n, tuple(new))

    def to_graph(self) -> DirectedGraph:
        return DirectedGraph(self.n, self.edges)

    def increasing_edges(self) -> frozenset:
        return frozenset((u, v) for u, v in self.edges if u < v)

    def __str__(self) -> str:
        return serialize(self)


@dataclass(frozen=True)
class ForestStats:
    n: int
    num_trees: int
    num_edges: int
    tree_sizes: tuple[int, ...]
    degrees: tuple[int, ...]
    in_degrees: tuple[int, ...]
    out_degrees: tuple[int, ...]
    max_degree: int
    max_tree_size: int

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "num_trees": self.num_trees,
            "num_edges": self.num_edges,
            "tree_sizes": list(self.tree_sizes),
            "max_degree": self.max_degree,
            "max_tree_size": self.max_tree_size,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), separators=(",", ":"))


def validate_forest(g: DirectedGraph) -> RootedForest:
    """Return the parent-map view of ``g``; raise if ``g`` is not a rooted forest."""
    parent = [0] * g.n
    for u, v in sorted(g.edges):
        if parent[v - 1]:
            raise MultipleParents(f"vertex {v} has incoming edges from {parent[v - 1]} and {u}")
        parent[v - 1] = u
    return RootedForest(g.n, tuple(parent))


def _check_acyclic(parent: tuple) -> None:
    n = len(parent)
    state = [0] * (n + 1)  # 0 unseen, 1 on current path, 2 known to reach a root
    for start in range(1, n + 1):
        v = start
        path = []
        while v and state[v] == 0:
            state[v] = 1
            path.append(v)
            v = parent[v - 1]
        if v and state[v] == 1:
            raise CycleDetected(f"cycle through vertex {v}")
        for w in path:
            state[w] = 2


def stats(f: RootedForest) -> ForestStats:
    roots = f.root_map()
    sizes = Counter(roots)
    ins = f.in_degrees()
    outs = f.out_degrees()
    degrees = tuple(i + o for i, o in zip(ins, outs))
    tree_sizes = tuple(sorted(sizes.values(), reverse=True))
    return ForestStats(
        n=f.n,
        num_trees=len(sizes),
        num_edges=f.num_edges,
        tree_sizes=tree_sizes,
        degrees=degrees,
        in_degrees=ins,
        out_degrees=outs,
        max_degree=max(degrees),
        max_tree_size=tree_sizes[0],
    )


def serialize(f: RootedForest) -> str:
    return " ".join(map(str, (f.n, *f.parent)))


def deserialize(text: str) -> RootedForest:
    tokens = text.split()
    if not tokens:
        raise ParseError("empty forest line")
    try:
        values = [int(t) for t in tokens]
    except ValueError as exc:
        raise ParseError(f"non-integer token in {text!r}") from exc
    n, parents = values[0], values[1:]
    if n < 1:
        raise ParseError(f"vertex count must be positive, got {n}")
    if len(parents) != n:
        raise ParseError(f"expected {n} parent entries, got {len(parents)}")
    return RootedForest(n, tuple(parents))
