"""The disconnect-and-reattach Markov chain and its Cannings generalization."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import InvalidOffspring, InvalidStep
from .forest import DirectedGraph, RootedForest


@dataclass(frozen=True)
class MoranStep:
    """Ordered pair of distinct vertices: ``v`` is disconnected then linked to ``u``."""

    u: int
    v: int


@dataclass(frozen=True)
class ChainRun:
    graph: DirectedGraph
    steps: int
    absorbed_at: int | None  # first time the state was a rooted forest


def _check_step(n: int, step: MoranStep) -> None:
    if step.u == step.v:
        raise InvalidStep(f"step ({step.u}, {step.v}) uses the same vertex twice")
    if not (1 <= step.u <= n and 1 <= step.v <= n):
        raise InvalidStep(f"step ({step.u}, {step.v}) outside 1..{n}")


def moran_step(g: DirectedGraph, step: MoranStep) -> DirectedGraph:
    _check_step(g.n, step)
    v = step.v
    kept = {(a, b) for a, b in g.edges if a != v and b != v}
    kept.add((step.u, v))
    return DirectedGraph(g.n, frozenset(kept))


def moran_step_forest(f: RootedForest, step: MoranStep) -> RootedForest:
    """Same transition as :func:`moran_step`, on the parent-map representation."""
    _check_step(f.n, step)
    parent = [0 if p == step.v else p for p in f.parent]
    parent[step.v - 1] = step.u
    return RootedForest(f.n, tuple(parent))


def random_step(n: int, rng: np.random.Generator) -> MoranStep:
    u = int(rng.integers(1, n + 1))
    r = int(rng.integers(1, n))
    return MoranStep(u, r if r < u else r + 1)


def run_chain(
    g0: DirectedGraph,
    steps: int,
    rng: np.random.Generator | None = None,
    *,
    script: Iterable[MoranStep] | None = None,
    on_step: Callable[[int, MoranStep, DirectedGraph], None] | None = None,
) -> ChainRun:
    """Apply ``steps`` transitions to ``g0``.

    Steps are drawn from ``rng`` unless ``script`` supplies them.  ``on_step``
    receives ``(t, step, state_after)`` for ``t = 1..steps``.
    """
    if steps < 0:
        raise ValueError("steps must be non-negative")
    if script is None and rng is None and steps > 0:
        raise ValueError("either rng or script is required")
    scripted = iter(script) if script is not None else None
    g = g0
    absorbed_at = 0 if g.is_forest() else None
    for t in range(1, steps + 1):
        step = next(scripted) if scripted is not None else random_step(g.n, rng)
        g = moran_step(g, step)
        if absorbed_at is None and g.is_forest():
            absorbed_at = t
        if on_step is not None:
            on_step(t, step, g)
    return ChainRun(g, steps, absorbed_at)


def moran_offspring(n: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform permutation of ``(2, 0, 1, ..., 1)``: one Moran event."""
    xi = np.ones(n, dtype=np.int64)
    xi[0], xi[1] = 2, 0
    return rng.permutation(xi)


def cannings_step(f: RootedForest, xi: Sequence[int], rng: np.random.Generator) -> RootedForest:
    xi = [int(x) for x in xi]
    if len(xi) != f.n or any(x < 0 for x in xi) or sum(xi) != f.n:
        raise InvalidOffspring(f"offspring vector {xi} must be {f.n} non-negative integers summing to {f.n}")
    dead = [v for v, x in enumerate(xi, start=1) if x == 0]
    if not dead:
        return f
    dead_set = set(dead)
    parent = [0 if (v in dead_set or p in dead_set) else p for v, p in enumerate(f.parent, start=1)]
    slots = np.array([v for v, x in enumerate(xi, start=1) for _ in range(x - 1)], dtype=np.int64)
    slots = rng.permutation(slots)
    for v, mother in zip(dead, slots):
        parent[v - 1] = int(mother)
    return RootedForest(f.n, tuple(parent))
