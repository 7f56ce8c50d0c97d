"""Acceptance criteria 1-11.

Each test records one ``PASS``/``FAIL`` line; the lines are printed as they
happen and again in the pytest terminal summary.  Running this file as a
script prints the same lines without pytest.
"""
import math
import subprocess
import sys
import time
from fractions import Fraction as F

import pytest

from moranforest import bijection as bj
from moranforest import exactdist as ed
from moranforest import harness, oracle
from moranforest.harness import Experiment
from moranforest.pmf import Pmf

RESULTS: list[str] = []


def report(number: int, ok: bool, detail: str) -> None:
    line = f"{'PASS' if ok else 'FAIL'}  criterion {number:>2}: {detail}"
    RESULTS.append(line)
    print(line)
    assert ok, line


# 1 ----------------------------------------------------------------------------------


def test_criterion_01_stationary_law_equals_ua_construction():
    t0 = time.perf_counter()
    tvs = {n: oracle.stationary_solve(n).tv(oracle.ua_exact(n)) for n in (3, 4)}
    elapsed = time.perf_counter() - t0
    ok = all(tv == 0 for tv in tvs.values()) and elapsed < 60
    report(1, ok, f"exact TV at n=3,4 = {tvs[3]}, {tvs[4]}; {elapsed:.1f}s (< 60s)")


# 2 ----------------------------------------------------------------------------------

SAMPLER_NAMES = ("ua", "backward", "uniform_tree")
MARGINALS = ("N", "Dmax", "Tmax", "degree", "T1")


@pytest.mark.slow
def test_criterion_02_three_samplers_agree():
    exact = {n: oracle.ua_exact(n) for n in (3, 4)}
    exact_ok = all(oracle.CORE_EXACT[s](n).tv(exact[n]) == 0 for s in SAMPLER_NAMES for n in (3, 4))

    reps = 10**5
    tables = {
        s: harness.simulate(100, reps, MARGINALS, s, master_seed=2000 + i)
        for i, s in enumerate(SAMPLER_NAMES)
    }
    worst = 0.0
    where = ""
    for i, a in enumerate(SAMPLER_NAMES):
        for b in SAMPLER_NAMES[i + 1:]:
            for j, stat in enumerate(MARGINALS):
                tv = Pmf.from_samples(tables[a][:, j]).tv(Pmf.from_samples(tables[b][:, j]))
                if tv > worst:
                    worst, where = tv, f"{a}/{b} {stat}"
    ok = exact_ok and worst < 0.02
    report(2, ok, f"exact cores at n=3,4: {exact_ok}; worst n=100 marginal TV {worst:.4f} "
                  f"({where}) (< 0.02)")


# 3 ----------------------------------------------------------------------------------


def test_criterion_03_closed_form_identities():
    bad = []
    for n in range(2, 51):
        nt = ed.ntrees_pmf(n)
        if nt.mean() != F(n, 2) or nt.var() != F(n * (n - 2), 6 * (n - 1)):
            bad.append(f"N moments n={n}")
        if ed.ntrees_pmf_via_a(n) != nt:
            bad.append(f"a-table law n={n}")
        deg = ed.degree_pmf(n)
        if deg.mean() != 1 or deg.var() != F(2 * (n - 2), 3 * (n - 1)):
            bad.append(f"degree moments n={n}")
        for ell, row in enumerate(ed.yule_law(n).rows()):
            if row.mean() != (1 + F(1, n - 1)) ** ell:
                bad.append(f"chain mean n={n} ell={ell}")
        if ed.h1_pmf(n).total() != 1:
            bad.append(f"H1 sum n={n}")
    report(3, not bad, f"exact rational identities for n=2..50, violations: {bad[:3] or 'none'}")


# 4 ----------------------------------------------------------------------------------


def test_criterion_04_a_table_two_ways():
    rows = {m: (ed.a_table(m), oracle.count_trees_by_increasing_edges(m)) for m in range(1, 7)}
    equal = all(a == b for a, b in rows.values())
    sums = all(sum(ed.a_table(m)) == m ** (m - 1) for m in range(1, 30))
    report(4, equal and sums, f"polynomial == enumeration for m<=6: {equal}; "
                              f"row sums m^(m-1) for m<30: {sums}")


# 5 ----------------------------------------------------------------------------------


def test_criterion_05_bijection():
    checked = 0
    ok = True
    for n in range(3, 7):
        for u in bj.restricted_vectors(n):
            tree = bj.phi(u)
            inc = frozenset((a, b) for a, b in tree.edges if a < b)
            ok &= bj.phi_inv(tree) == u and inc == bj.increasing_pairs(u)
            checked += 1
    u = (7, 8, 1, 13, 11, 6, 7, 7, 9, 12, 5)
    v = bj.theta(u)
    fig = v == (6, 7, 1, 12, 10, 6, 7, 7, 9, 11, 5) and bj.cycles(v) == [(10, 6, 7, 9), (11,), (12, 5)]
    report(5, ok and fig, f"round trip and increasing edges on {checked} vectors (n<=6): {ok}; "
                          f"worked example Theta u and cycles: {fig}")


# 6 ----------------------------------------------------------------------------------


def test_criterion_06_degree_limit():
    p0 = abs(ed.degree_limit_point(0) - (1 - 2 / math.e))
    tv = ed.degree_pmf(10**4, "float").tv(ed.degree_limit_pmf(60))
    sandwich = all(
        ed.degree_tail_bounds(k)[0] <= ed.degree_limit_tail(k) <= ed.degree_tail_bounds(k)[1]
        for k in range(1, 31)
    )
    ok = p0 <= 1e-12 and tv < 0.01 and sandwich
    report(6, ok, f"|P(D=0)-(1-2/e)| = {p0:.1e}; TV(n=10^4, limit) = {tv:.2e} (< 0.01); "
                  f"tail sandwich k=1..30: {sandwich}")


# 7 ----------------------------------------------------------------------------------


@pytest.mark.slow
def test_criterion_07_tree_size_laws():
    r = harness.uniform_tree_statistic(Experiment(10**4, 10**5, "TU", "ua", master_seed=7007))
    chi_ok = r.p_value > 1e-3
    zmax = max(abs(z) for z in r.extra["size_bias_z"].values())
    bias_ok = r.extra["size_bias_ok"]
    ratio = ed.tree_tail_exact(10**4, 20) / ed.tree_tail_asymptotic(20)
    ratio_ok = 0.9 <= ratio <= 1.1
    report(7, chi_ok and bias_ok and ratio_ok,
           f"T^U chi-square p = {r.p_value:.3f} (> 0.001); size-bias max |z| = {zmax:.2f} "
           f"(<= 4); tail DP/asymptotic at n=10^4, k=20 = {ratio:.4f} (in [0.9, 1.1])")


# 8 ----------------------------------------------------------------------------------


def test_criterion_08_clt():
    t0 = time.perf_counter()
    ks = ed.ks_to_normal(ed.clt_normalized_dist(2000))
    elapsed = time.perf_counter() - t0
    report(8, ks < 0.02 and elapsed < 60, f"KS distance at n=2000 = {ks:.5f} (< 0.02); {elapsed:.2f}s")


# 9 ----------------------------------------------------------------------------------


@pytest.mark.slow
def test_criterion_09_extremes():
    t0 = time.perf_counter()
    tmax = harness.extremes_scan("Tmax", [10**5], 200, 9001).rows[0].ratio
    dmax = harness.extremes_scan("Dmax", [10**6], 50, 9002).rows[0].ratio
    grid = [10**3, 10**4, 10**5]
    t_trend = harness.extremes_scan("Tmax", grid, 2000, 9003)
    d_trend = harness.extremes_scan("Dmax", grid, 2000, 9004)
    elapsed = time.perf_counter() - t0
    bands = 0.8 <= tmax <= 1.2 and 0.7 <= dmax <= 1.3
    trends = t_trend.trending_to_one() and d_trend.trending_to_one()
    fmt = lambda rep: "/".join(f"{x:.3f}" for x in rep.ratios())  # noqa: E731
    report(9, bands and trends and elapsed < 600,
           f"T^max ratio at 10^5 = {tmax:.3f} (in [0.8, 1.2]); D^max ratio at 10^6 = {dmax:.3f} "
           f"(in [0.7, 1.3]); ratios over 10^3/10^4/10^5: T^max {fmt(t_trend)} "
           f"trending={t_trend.trending_to_one()}, D^max {fmt(d_trend)} "
           f"trending={d_trend.trending_to_one()}; {elapsed:.0f}s")


# 10 ---------------------------------------------------------------------------------


@pytest.mark.slow
def test_criterion_10_local_limit():
    reps = 10**6
    r = harness.run(Experiment(0, reps, "local_degree", "local_limit", master_seed=1010))
    sigma = math.sqrt(2 / 3 / reps)  # Var(D) = E[D(D-1)] + E[D] - 1 = 2/3
    ok = r.p_value > 1e-3 and abs(r.mean - 1) <= 3 * sigma
    report(10, ok, f"chi-square p = {r.p_value:.3f} (> 0.001); mean = {r.mean:.5f} "
                   f"(1 +- {3 * sigma:.5f})")


# 11 ---------------------------------------------------------------------------------

CLI_RUNS = [
    ["sample", "--n", "30", "--count", "5000", "--seed", "11"],
    ["sample", "--n", "30", "--count", "3000", "--sampler", "backward", "--seed", "11"],
    ["sample", "--n", "30", "--count", "3000", "--sampler", "uniform_tree", "--stats", "--seed", "11"],
    ["sample", "--count", "70000", "--sampler", "local_limit", "--seed", "11"],
    ["chain", "--n", "6", "--steps", "50", "--start", "complete", "--seed", "11"],
    ["mc", "--statistic", "T1", "--n", "100", "--reps", "5000", "--seed", "11", "--format", "json"],
    ["mc", "--statistic", "TU", "--n", "300", "--reps", "5000", "--seed", "11"],
    ["asymptotics", "--statistic", "Dmax", "--n-grid", "1000,10000", "--reps", "300", "--seed", "11"],
]


def _cli(argv):
    return subprocess.run([sys.executable, "-m", "moranforest", *argv],
                          capture_output=True, check=True).stdout


@pytest.mark.slow
def test_criterion_11_cli_determinism_across_jobs():
    differing = []
    for argv in CLI_RUNS:
        outs = [_cli(argv + ["--jobs", str(j)]) for j in (1, 1, 4)]
        if not (outs[0] and outs[0] == outs[1] == outs[2]):
            differing.append(argv[0])
    report(11, not differing, f"{len(CLI_RUNS)} invocations byte-identical across repeats and "
                              f"--jobs 1/4; differing: {differing or 'none'}")


if __name__ == "__main__":
    tests = [v for k, v in sorted(globals().items()) if k.startswith("test_criterion_")]
    failed = 0
    for t in tests:
        try:
            t()
        except AssertionError:
            failed += 1
    sys.exit(1 if failed else 0)
