import math
from collections import Counter

import numpy as np
import pytest
from scipy import stats as sstats

from moranforest import exactdist, oracle, samplers
from moranforest.errors import BudgetExceeded, InvalidN
from moranforest.forest import RootedForest, validate_forest
from moranforest.harness import chi_square
from moranforest.rng import make_rng

from .conftest import rows_as_counts, tv_counts


def test_ua_rejects_n1(rng):
    with pytest.raises(InvalidN):
        samplers.sample_ua(1, rng)


def test_ua_n2_single_edge_uniform_root(rng):
    roots = Counter()
    for _ in range(4000):
        f = samplers.sample_ua(2, rng).forest
        assert f.num_edges == 1
        roots[f.roots[0]] += 1
    assert abs(roots[1] / 4000 - 0.5) < 0.03


def test_ua_pre_relabel_edges_of_figure_vector():
    u = (5, 4, 2, 1, 2, 7, 2)
    f = samplers.ua_forest_from_vector(u)
    assert f.edges == {(2, 3), (1, 4), (2, 5), (2, 7)}


def test_ua_record_consistency(rng):
    for _ in range(200):
        rec = samplers.sample_ua(9, rng)
        assert all(u < v for u, v in rec.pre_relabel.edges)
        assert rec.pre_relabel.num_edges == sum(1 for ell, x in enumerate(rec.u, 1) if x < ell)
        assert rec.pre_relabel.relabel(rec.sigma) == rec.forest
        v = int(rng.integers(1, 10))
        assert rec.steps_remaining(v) == 9 - rec.arrival_index(v)


def test_vertex1_record_small_cases(rng):
    for _ in range(50):
        t1, h1, tt = samplers.vertex1_record(samplers.sample_ua(2, rng))
        assert (t1, h1) == (2, 1) and tt in (1, 2)
    for _ in range(300):
        t1, h1, tt = samplers.vertex1_record(samplers.sample_ua(12, rng))
        assert 1 <= tt <= t1 and 0 <= h1 <= 11


def test_vertex1_record_agrees_with_summary_kernel(rng):
    """The scalar record and the vectorized summary compute the same three numbers."""
    from moranforest import kernels

    for _ in range(200):
        rec = samplers.sample_ua(15, rng)
        b1 = np.array([rec.arrival_index(1)])
        row = kernels.ua_summary(np.array([rec.u]), b1, np.array([0.0]))[0]
        assert (row[4], row[5], row[6]) == samplers.vertex1_record(rec)


@pytest.mark.parametrize("name", ["ua", "backward", "uniform_tree"])
def test_batches_are_forests(name, rng):
    for n in (2, 3, 17):
        for row in samplers.SAMPLERS[name](n, 100, rng):
            f = RootedForest(n, tuple(row.tolist()))
            assert validate_forest(f.to_graph()) == f
            assert f.num_edges >= 1


def test_backward_n2(rng):
    for _ in range(50):
        assert samplers.sample_backward(2, rng).num_edges == 1


def test_backward_from_pairs_example():
    # newest disconnection first: 3 (mother 1), then 1 (mother 2), then 2 (mother 3)
    f, steps = samplers.backward_from_pairs([1, 2, 2, 3], [3, 1, 3, 2], 3)
    assert steps == 4
    # 2 is oldest, 1 next, 3 youngest: 1 <- 2 kept, 3 <- 1 kept, 2 <- 3 dropped
    assert f.parent == (2, 0, 1)


def test_backward_coupon_collector():
    n, runs = 100, 1000
    _, steps = samplers.backward_batch(n, runs, make_rng(3), return_steps=True)
    # each pair reveals a new vertex with probability (unseen)/n, so about n H_n pairs
    expected = n * sum(1 / k for k in range(1, n + 1))
    assert abs(steps.mean() / expected - 1) < 0.10


@pytest.mark.parametrize("name", ["ua", "backward", "uniform_tree"])
def test_batch_sampler_n4_chi_square_against_exact_law(name):
    reps = 10**5
    exact = oracle.ua_exact(4)
    keys = sorted(exact.probs)
    counts = rows_as_counts(samplers.SAMPLERS[name](4, reps, make_rng(4100)))
    assert set(counts) <= set(keys)
    observed = [counts.get(k, 0) for k in keys]
    expected = [float(exact[k]) * reps for k in keys]
    assert sstats.chisquare(observed, expected).pvalue > 1e-3


def test_backward_vs_ua_n4_tv():
    """Two-sample TV over the 124 labeled forests.  Under equal laws its mean is
    about 0.0185 with sd about 0.0013, so the 0.02 bound is tight."""
    reps = 10**5
    a = rows_as_counts(samplers.backward_batch(4, reps, make_rng(404)))
    b = rows_as_counts(samplers.ua_batch(4, reps, make_rng(405)))
    assert tv_counts(a, b) < 0.02


def test_uniform_rooted_tree_small(rng):
    assert samplers.sample_uniform_rooted_tree(1, rng).parent == (0,)
    c = Counter(samplers.sample_uniform_rooted_tree(2, rng).parent for _ in range(2000))
    assert set(c) == {(0, 1), (2, 0)}


def test_uniform_rooted_tree_m3_frequencies():
    reps = 10**5
    trees = rows_as_counts(samplers.uniform_tree_batch(3, reps, make_rng(33)))
    assert set(trees) == set(oracle.rooted_trees(3))
    p = 1 / 9
    se = math.sqrt(p * (1 - p) / reps)
    assert all(abs(c / reps - p) < 3 * se for c in trees.values())


def test_uniform_rooted_tree_m4_chi_square():
    reps = 64 * 500
    counts = rows_as_counts(samplers.uniform_tree_batch(4, reps, make_rng(44)))
    assert len(counts) == 64
    assert sstats.chisquare(list(counts.values())).pvalue > 1e-3


def test_prufer_decoder_matches_oracle_decoder():
    for m in range(1, 6):
        for root in range(1, m + 1):
            for word in np.ndindex(*([m] * max(m - 2, 0))):
                word = tuple(x + 1 for x in word)
                ours = samplers.rooted_tree_from_prufer(word, root, m).parent
                edges = oracle._decode_prufer(word, m)
                assert ours == tuple(oracle._orient(edges, root, m))


def test_via_uniform_tree_n2(rng):
    for _ in range(20):
        assert samplers.sample_via_uniform_tree(2, rng).num_edges == 1


def test_prune_keeps_edge_count():
    tree = np.array([[0, 3, 1, 3]])
    out = samplers._prune_and_extend(tree, np.array([2]))
    kept = int((out[0, :4] > 0).sum())
    removed = int(((tree > 0) & (tree > np.arange(1, 5))).sum())
    assert kept + removed == 3 and out[0, 4] == 2


@pytest.mark.slow
def test_via_uniform_tree_n4_against_stationary_law():
    reps = 10**6
    counts = rows_as_counts(samplers.via_uniform_tree_batch(4, reps, make_rng(4000)))
    exact = oracle.stationary_solve(4)
    keys = set(counts) | set(exact.probs)
    tv = 0.5 * sum(abs(counts.get(k, 0) / reps - float(exact[k])) for k in keys)
    assert tv < 0.01


def test_local_limit_focal_degree_zero():
    reps = 10**6
    out = samplers.local_limit_batch(reps, make_rng(61))
    p0 = 1 - 2 / math.e
    se = math.sqrt(p0 * (1 - p0) / reps)
    assert abs((out[:, 0] == 0).mean() - p0) < 3 * se


def test_local_limit_spine_edge_half(rng):
    # the spine edge is kept iff the second mark is smaller: degree minus kept children
    v0 = rng.random(200000)
    v1 = rng.random(200000)
    assert abs((v1 < v0).mean() - 0.5) < 0.005


def test_local_limit_singletons_exploratory():
    """Singleton components match the limiting law of the tree of a fixed vertex at k=1."""
    reps = 10**6
    out = samplers.local_limit_batch(reps, make_rng(62))
    p = exactdist.limit_tree1_pmf(1)
    se = math.sqrt(p * (1 - p) / reps)
    assert abs((out[:, 1] == 1).mean() - p) < 3 * se


def test_local_limit_sample_invariants(rng):
    out = samplers.local_limit_batch(20000, rng)
    assert (out[:, 1] >= 1).all()
    assert (out[:, 0] <= out[:, 1] - 0).all()
    s = samplers.sample_local_limit(rng)
    assert s.component_size >= 1 and s.focal_degree <= s.component_size


def test_local_limit_budget():
    with pytest.raises(BudgetExceeded):
        samplers.local_limit_batch(20000, make_rng(1), budget=1)
    out = samplers.local_limit_batch(20000, make_rng(1), budget=1, on_budget="censor")
    assert (out[:, 1] == -1).any() and ((out[:, 1] == 1) | (out[:, 1] == -1)).all()


def test_h1_chi_square_n50():
    reps = 10**5
    table = samplers.ua_summary_batch(50, reps, make_rng(50))
    vals, cnt = np.unique(table[:, 5], return_counts=True)
    res = chi_square(dict(zip(vals.tolist(), cnt.tolist())), exactdist.h1_pmf(50).to_float(), reps)
    assert res.p_value > 1e-3


def test_t1_chi_square_n50_scalar_sampler():
    """Uses the scalar record path, independent of the summary kernel."""
    rng = make_rng(51)
    c = Counter(samplers.vertex1_record(samplers.sample_ua(50, rng))[0] for _ in range(20000))
    res = chi_square(dict(c), exactdist.t1_pmf(50).to_float(), 20000)
    assert res.p_value > 1e-3
