from collections import Counter

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from moranforest import bijection as bj
from moranforest import exactdist
from moranforest.errors import RangeError
from moranforest.forest import RootedForest
from moranforest.samplers import ua_forest_from_vector

FIG_U = (7, 8, 1, 13, 11, 6, 7, 7, 9, 12, 5)
FIG_THETA = (6, 7, 1, 12, 10, 6, 7, 7, 9, 11, 5)


def increasing_edges(tree: RootedForest) -> frozenset:
    return frozenset((a, b) for a, b in tree.edges if a < b)


def test_figure_theta():
    assert bj.theta(FIG_U) == FIG_THETA
    assert bj.theta_inv(FIG_THETA) == FIG_U


def test_figure_cycles_and_word():
    assert bj.cycles(FIG_THETA) == [(10, 6, 7, 9), (11,), (12, 5)]
    assert bj.cycle_word(FIG_THETA) == (1, 10, 6, 7, 9, 11, 12, 5)


def test_figure_tree():
    tree = bj.phi(FIG_U)
    assert tree.n == 12 and tree.roots == (5,)
    assert tree.parent == (10, 6, 7, 1, 0, 11, 6, 7, 7, 9, 12, 5)
    # the path from 1 to the root visits every cycle, largest element first
    assert bj.root_path(tree) == (1, 10, 9, 7, 6, 11, 12, 5)
    assert bj.phi_inv(tree) == FIG_U


def test_figure_increasing_edges():
    tree = bj.phi(FIG_U)
    assert increasing_edges(tree) == bj.increasing_pairs(FIG_U)


def test_theta_keeps_small_entries():
    u = (1, 2, 1, 3, 5)
    assert bj.theta(u) == u


def test_theta_round_trip_n5():
    vecs = list(bj.restricted_vectors(5))
    assert len(vecs) == 64
    images = {bj.theta(u) for u in vecs}
    assert images == set(bj.compressed_vectors(5))
    assert all(bj.theta_inv(bj.theta(u)) == u for u in vecs)


def test_acyclic_vector_is_its_own_tree():
    v = (1, 2, 2, 4)  # 1->2, 2->3, 2->4, 4->5
    assert bj.cycles(v) == []
    tree = bj.psi(v)
    assert tree.roots == (1,)
    assert tree.parent == (0, 1, 2, 2, 4)


def test_self_loop_is_a_cycle():
    v = (2,)  # n=3, edge 2->2
    assert bj.cycles(v) == [(2,)]
    assert bj.psi(v).parent == (2, 0)


def test_psi_image_n5():
    image = {bj.psi(v).parent for v in bj.compressed_vectors(5)}
    assert len(image) == 4 ** 3


@pytest.mark.parametrize("n", [3, 4, 5, 6])
def test_phi_exhaustive(n):
    seen = set()
    for u in bj.restricted_vectors(n):
        tree = bj.phi(u)
        assert len(tree.roots) == 1
        assert bj.phi_inv(tree) == u
        assert increasing_edges(tree) == bj.increasing_pairs(u)
        seen.add(tree.parent)
    assert len(seen) == (n - 1) ** (n - 2)


@pytest.mark.parametrize("n", [5, 6])
def test_increasing_edges_are_the_restricted_ua_forest(n):
    # append any admissible u_n; the UA forest on n-1 vertices ignores it
    for u in bj.restricted_vectors(n):
        f = ua_forest_from_vector((n,) + u + (1,))
        restricted = {(a, b) for a, b in f.edges if b < n}
        assert increasing_edges(bj.phi(u)) == restricted


@pytest.mark.parametrize("m", range(1, 7))
def test_increasing_edge_counts_match_a_table(m):
    counts = Counter(len(increasing_edges(bj.psi(v, m + 1))) for v in bj.compressed_vectors(m + 1))
    assert tuple(counts[k] for k in range(m)) == exactdist.a_table(m)


@st.composite
def restricted(draw):
    n = draw(st.integers(3, 200))
    u = []
    for ell in range(2, n):
        x = draw(st.integers(1, n - 1))
        u.append(x if x < ell else x + 1)
    return tuple(u)


@given(restricted())
@settings(max_examples=300, deadline=None)
def test_random_round_trip(u):
    tree = bj.phi(u)
    assert bj.phi_inv(tree) == u
    assert increasing_edges(tree) == bj.increasing_pairs(u)
    assert bj.psi_inv(bj.psi(bj.theta(u))) == bj.theta(u)


@pytest.mark.parametrize(
    "bad",
    [(2, 1), (1, 3), (0, 1), (1, 9), (1,)],
)
def test_theta_range_errors(bad):
    with pytest.raises(RangeError):
        bj.theta(bad, 4)


@pytest.mark.parametrize("bad", [(4, 1), (0, 1), (1,)])
def test_compressed_range_errors(bad):
    for fn in (bj.theta_inv, bj.cycles, bj.psi):
        with pytest.raises(RangeError):
            fn(bad, 4)
