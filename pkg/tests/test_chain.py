from collections import Counter

import numpy as np
import pytest

from moranforest.chain import (
    MoranStep,
    cannings_step,
    moran_offspring,
    moran_step,
    moran_step_forest,
    random_step,
    run_chain,
)
from moranforest.errors import InvalidOffspring, InvalidStep
from moranforest.forest import DirectedGraph, RootedForest, validate_forest
from moranforest.rng import make_rng


def G(n, *edges):
    return DirectedGraph(n, frozenset(edges))


def test_step_on_empty_graph():
    assert moran_step(DirectedGraph.empty(3), MoranStep(1, 2)).edges == {(1, 2)}


def test_step_keeps_sole_edge():
    assert moran_step(G(2, (1, 2)), MoranStep(1, 2)).edges == {(1, 2)}


def test_step_disconnects_both_directions():
    assert moran_step(G(3, (1, 2), (2, 3)), MoranStep(3, 2)).edges == {(3, 2)}


@pytest.mark.parametrize("u,v", [(1, 1), (0, 2), (2, 4)])
def test_invalid_step(u, v):
    with pytest.raises(InvalidStep):
        moran_step(DirectedGraph.empty(3), MoranStep(u, v))


def test_zero_steps_is_identity(rng):
    g = DirectedGraph.complete(4)
    assert run_chain(g, 0, rng).graph == g


def test_scripted_star_from_any_start():
    script = [MoranStep(1, v) for v in range(2, 5)]
    for g0 in (DirectedGraph.empty(4), DirectedGraph.complete(4), G(4, (2, 1), (3, 4))):
        run = run_chain(g0, 3, script=script)
        assert run.graph.edges == {(1, 2), (1, 3), (1, 4)}


def test_forest_once_every_vertex_was_reattached():
    for seed in range(100):
        rng = make_rng(seed)
        n = 5
        seen: set = set()
        state = {"all_seen_at": None, "ok": True}

        def watch(t, step, g):
            seen.add(step.v)
            if state["all_seen_at"] is None and len(seen) == n:
                state["all_seen_at"] = t
            if state["all_seen_at"] is not None:
                state["ok"] &= g.is_forest()

        run = run_chain(DirectedGraph.complete(n), 60, rng, on_step=watch)
        assert state["ok"]
        assert run.absorbed_at is not None and run.absorbed_at <= state["all_seen_at"]


def test_forest_step_matches_graph_step(rng):
    f = RootedForest(6, (0, 1, 1, 3, 0, 5))
    for _ in range(300):
        s = random_step(6, rng)
        assert moran_step_forest(f, s).to_graph() == moran_step(f.to_graph(), s)
        f = moran_step_forest(f, s)
        assert f.num_edges >= 1


def test_random_step_uniform_over_pairs(rng):
    c = Counter((s.u, s.v) for s in (random_step(3, rng) for _ in range(60000)))
    assert set(c) == {(u, v) for u in range(1, 4) for v in range(1, 4) if u != v}
    assert max(abs(x / 60000 - 1 / 6) for x in c.values()) < 0.01


def test_chain_reproducible():
    a = run_chain(DirectedGraph.complete(5), 40, make_rng(9)).graph
    b = run_chain(DirectedGraph.complete(5), 40, make_rng(9)).graph
    assert a == b


def test_cannings_no_deaths_keeps_forest(rng):
    f = RootedForest(4, (0, 1, 1, 0))
    assert cannings_step(f, [1, 1, 1, 1], rng) == f


def test_cannings_single_mother():
    f = RootedForest(3, (0, 1, 2))
    assert cannings_step(f, [3, 0, 0], make_rng(0)) == RootedForest(3, (0, 1, 1))


@pytest.mark.parametrize("xi", [[1, 1], [2, 1, 1], [3, -1, 1], [2, 2, 0]])
def test_cannings_bad_offspring(xi):
    with pytest.raises(InvalidOffspring):
        cannings_step(RootedForest.edgeless(3), xi, make_rng(0))


def test_cannings_outputs_forests(rng):
    f = RootedForest.edgeless(7)
    for _ in range(500):
        xi = rng.multinomial(7, [1 / 7] * 7)
        f = cannings_step(f, xi, rng)
        assert validate_forest(f.to_graph()) == f


def test_cannings_with_moran_offspring_matches_moran_step():
    """One Moran event through the Cannings step has the chain's transition law."""
    f = RootedForest(4, (0, 1, 0, 3))
    rng = make_rng(5)
    reps = 60000
    via_cannings = Counter(cannings_step(f, moran_offspring(4, rng), rng).parent for _ in range(reps))
    direct = Counter()
    for u in range(1, 5):
        for v in range(1, 5):
            if u != v:
                direct[moran_step_forest(f, MoranStep(u, v)).parent] += 1
    assert set(via_cannings) == set(direct)
    for key, c in direct.items():
        p = c / 12
        se = np.sqrt(p * (1 - p) / reps)
        assert abs(via_cannings[key] / reps - p) < 4 * se
