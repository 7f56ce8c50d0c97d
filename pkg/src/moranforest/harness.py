"""Monte Carlo experiments compared against exact or limiting laws.

Replicates are grouped into fixed-size blocks whose size depends only on
``n``; block ``i`` draws from ``derived_rng(master_seed, i)`` and blocks are
reduced in index order.  Results are therefore identical for every worker
count.
"""
from __future__ import annotations

import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import stats as sstats

from . import exactdist, kernels, samplers
from .errors import DomainError, IncompatibleReference, ValidationError
from .pmf import Pmf
from .rng import derived_rng

STATISTICS = ("N", "degree", "TU", "T1", "H1", "Dmax", "Tmax", "local_degree")
SAMPLERS = ("ua", "backward", "uniform_tree", "local_limit")

# column of each statistic in the per-forest summary tables
_UA_COL = {name: i for i, name in enumerate(kernels.UA_COLUMNS)}
_FOREST_COL = {name: i for i, name in enumerate(kernels.FOREST_COLUMNS)}
_ALIASES = {"degree": "deg1"}

_BLOCK_ELEMENTS = 1 << 21
_MAX_BLOCK = 1024
_LOCAL_BLOCK = 1 << 16
RATIONAL_MAX_N = 200


def block_size(n: int, sampler: str = "ua") -> int:
    """Replicates per block; a function of ``n`` and the sampler only."""
    if sampler == "local_limit":
        return _LOCAL_BLOCK
    return max(1, min(_MAX_BLOCK, _BLOCK_ELEMENTS // max(n, 1)))


@dataclass(frozen=True)
class Experiment:
    n: int
    replicates: int
    statistic: str = "N"
    sampler: str = "ua"
    master_seed: int = 0

    def __post_init__(self):
        if self.statistic not in STATISTICS:
            raise ValidationError(f"unknown statistic {self.statistic!r}; pick from {STATISTICS}")
        if self.sampler not in SAMPLERS:
            raise ValidationError(f"unknown sampler {self.sampler!r}; pick from {SAMPLERS}")
        if self.replicates < 1:
            raise ValidationError("replicates must be >= 1")
        if (self.statistic == "local_degree") != (self.sampler == "local_limit"):
            raise ValidationError("local_degree goes with the local_limit sampler, and only it")
        if self.statistic in ("TU", "H1") and self.sampler != "ua":
            raise ValidationError(f"{self.statistic} is tracked by the ua sampler only")
        if self.sampler != "local_limit" and self.n < 2:
            raise ValidationError(f"need n >= 2, got {self.n}")


@dataclass
class TestReport:
    statistic: str
    n: int
    replicates: int
    empirical: Pmf
    reference: Pmf | None = None
    prediction: float | None = None
    mean: float = float("nan")
    mean_se: float = float("nan")
    reference_mean: float | None = None
    chi2: float | None = None
    df: int | None = None
    p_value: float | None = None
    tv: float | None = None
    passed: bool | None = None
    extra: dict = field(default_factory=dict)
    runtime: float = 0.0

    __test__ = False  # keep pytest from collecting this class

    def to_dict(self, include_runtime: bool = False) -> dict:
        out = {
            "statistic": self.statistic,
            "n": self.n,
            "replicates": self.replicates,
            "mean": self.mean,
            "mean_se": self.mean_se,
            "reference_mean": self.reference_mean,
            "prediction": self.prediction,
            "chi2": self.chi2,
            "df": self.df,
            "p_value": self.p_value,
            "tv": self.tv,
            "passed": self.passed,
            "empirical": {str(k): float(p) for k, p in self.empirical.items() if p},
        }
        out.update(self.extra)
        if include_runtime:
            out["runtime"] = self.runtime
        return out


# -- block evaluation -----------------------------------------------------------------


def _block_table(n: int, sampler: str, count: int, rng: np.random.Generator) -> tuple[np.ndarray, dict]:
    if sampler == "ua":
        return samplers.ua_summary_batch(n, count, rng), _UA_COL
    if sampler == "local_limit":
        out = samplers.local_limit_batch(count, rng, on_budget="censor")
        return out, {"local_degree": 0, "component_size": 1}
    parents = samplers.SAMPLERS[sampler](n, count, rng)
    return kernels.forest_summary(parents), _FOREST_COL


def _block_columns(args) -> np.ndarray:
    n, sampler, columns, seed, index, count = args
    table, layout = _block_table(n, sampler, count, derived_rng(seed, index))
    return table[:, [layout[_ALIASES.get(c, c)] for c in columns]]


def _extremes_block(args) -> np.ndarray:
    n, seed, index, count = args
    rng = derived_rng(seed, index)
    return kernels.ua_extremes(samplers.ua_vector(n, rng, count))


def _blocks(total: int, size: int) -> list[tuple[int, int]]:
    nblocks = -(-total // size)
    return [(i, min(size, total - i * size)) for i in range(nblocks)]


def _map(fn: Callable, tasks: Sequence, jobs: int) -> list:
    if jobs <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, tasks))


def simulate(
    n: int,
    replicates: int,
    columns: Sequence[str],
    sampler: str = "ua",
    master_seed: int = 0,
    jobs: int = 1,
) -> np.ndarray:
    """``(replicates, len(columns))`` array of per-replicate statistics."""
    size = block_size(n, sampler)
    tasks = [(n, sampler, tuple(columns), master_seed, i, c) for i, c in _blocks(replicates, size)]
    return np.concatenate(_map(_block_columns, tasks, jobs), axis=0)


# -- goodness of fit ----------------------------------------------------------------------


@dataclass(frozen=True)
class ChiSquare:
    statistic: float
    df: int
    p_value: float
    bins: tuple[tuple[int, int], ...]  # inclusive ranges after pooling


def chi_square(counts: Pmf | dict | Sequence[int], reference: Pmf, total: int | None = None,
               min_expected: float = 5.0) -> ChiSquare:
    """Pearson test of observed counts against ``reference``.

    Bins run over the reference support; observations outside it join the end
    bins, as does any mass a truncated reference leaves out.  Bins with
    expected count below ``min_expected`` are merged into their neighbour
    towards the nearer tail.
    """
    if isinstance(counts, Pmf):
        raise ValidationError("chi_square needs raw counts, not a normalized pmf")
    if not isinstance(counts, dict):
        counts = {k: int(c) for k, c in enumerate(counts) if c}
    total = sum(counts.values()) if total is None else total
    lo, hi = reference.lo, reference.hi
    probs = [float(reference[k]) for k in range(lo, hi + 1)]
    probs[-1] += max(0.0, 1.0 - math.fsum(probs))  # unlisted tail mass
    obs = [0] * len(probs)
    for k, c in counts.items():
        obs[min(max(k, lo), hi) - lo] += c
    exp = [p * total for p in probs]

    # pool from the left until each bin reaches min_expected, then fold a
    # short last bin into its predecessor
    bins: list[list] = []  # [start, end, obs, exp]
    cur = None
    for i, (o, e) in enumerate(zip(obs, exp)):
        if cur is None:
            cur = [lo + i, lo + i, o, e]
        else:
            cur[1], cur[2], cur[3] = lo + i, cur[2] + o, cur[3] + e
        if cur[3] >= min_expected:
            bins.append(cur)
            cur = None
    if cur is not None:
        if bins:
            last = bins[-1]
            last[1], last[2], last[3] = cur[1], last[2] + cur[2], last[3] + cur[3]
        else:
            bins.append(cur)
    if len(bins) < 2:
        return ChiSquare(0.0, 0, 1.0, tuple((b[0], b[1]) for b in bins))
    stat = math.fsum((b[2] - b[3]) ** 2 / b[3] for b in bins)
    df = len(bins) - 1
    return ChiSquare(stat, df, float(sstats.chi2.sf(stat, df)), tuple((b[0], b[1]) for b in bins))


def tv_distance(a: Pmf, b: Pmf) -> float:
    return float(a.tv(b))


def _empirical(values: np.ndarray) -> tuple[Pmf, dict[int, int]]:
    vals, cnt = np.unique(values, return_counts=True)
    counts = {int(v): int(c) for v, c in zip(vals, cnt)}
    return Pmf.from_counts(counts), counts


def _mean_se(values: np.ndarray) -> tuple[float, float]:
    x = values.astype(np.float64)
    mean = float(x.mean())
    se = float(x.std(ddof=1) / math.sqrt(x.size)) if x.size > 1 else 0.0
    return mean, se


def reference_law(statistic: str, n: int) -> Pmf:
    """Exact law of ``statistic`` for the Moran forest on ``n`` vertices."""
    backend = "rational" if n <= RATIONAL_MAX_N else "float"
    if statistic == "N":
        return exactdist.ntrees_pmf(n, backend).to_float()
    if statistic == "degree":
        return exactdist.degree_pmf(n, backend).to_float()
    if statistic == "T1":
        return exactdist.t1_pmf(n, backend).to_float()
    if statistic == "H1":
        return exactdist.h1_pmf(n).to_float()
    if statistic == "local_degree":
        return exactdist.degree_limit_pmf(40)
    raise IncompatibleReference(f"no exact law of {statistic} is available at n={n}")


def run(e: Experiment, *, jobs: int = 1, alpha: float = 1e-3) -> TestReport:
    started = time.perf_counter()
    reference = reference_law(e.statistic, e.n)
    values = simulate(e.n, e.replicates, [e.statistic], e.sampler, e.master_seed, jobs)[:, 0]
    empirical, counts = _empirical(values)
    mean, se = _mean_se(values)
    test = chi_square(counts, reference, e.replicates)
    return TestReport(
        statistic=e.statistic,
        n=e.n,
        replicates=e.replicates,
        empirical=empirical,
        reference=reference,
        mean=mean,
        mean_se=se,
        reference_mean=float(reference.mean()),
        chi2=test.statistic,
        df=test.df,
        p_value=test.p_value,
        tv=tv_distance(empirical, reference),
        passed=test.p_value > alpha,
        runtime=time.perf_counter() - started,
    )


def uniform_tree_statistic(e: Experiment, *, jobs: int = 1, kmax: int = 20,
                           alpha: float = 1e-3, z_limit: float = 4.0) -> TestReport:
    """Size of a uniformly chosen tree, against its limiting law.

    Also checks that the tree of a fixed vertex is the size-biased version:
    for each ``k <= 10`` the paired per-replicate difference
    ``1{T1 = k} - (k/2) 1{TU = k}`` must have mean within ``z_limit`` standard
    errors of zero.
    """
    if e.sampler != "ua":
        raise ValidationError("uniform-tree statistics are tracked by the ua sampler")
    started = time.perf_counter()
    data = simulate(e.n, e.replicates, ["TU", "T1"], "ua", e.master_seed, jobs)
    tu, t1 = data[:, 0], data[:, 1]
    reference = exactdist.limit_tree_table("uniform", kmax=kmax)
    empirical, counts = _empirical(tu)
    mean, se = _mean_se(tu)
    test = chi_square(counts, reference, e.replicates)
    zs = {}
    for k in range(1, 11):
        d = (t1 == k).astype(np.float64) - (k / 2.0) * (tu == k)
        sd = d.std(ddof=1)
        zs[k] = float(d.mean() / (sd / math.sqrt(d.size))) if sd > 0 else 0.0
    size_biased_ok = all(abs(z) <= z_limit for z in zs.values())
    head = Pmf([float(empirical[k]) for k in range(0, kmax + 1)], 0, exact=False, truncated=True)
    tv = 0.5 * math.fsum(abs(float(head[k]) - float(reference[k])) for k in range(1, kmax + 1))
    tv += 0.5 * abs((1 - head.total()) - (1 - reference.total()))
    return TestReport(
        statistic="TU",
        n=e.n,
        replicates=e.replicates,
        empirical=empirical,
        reference=reference,
        mean=mean,
        mean_se=se,
        reference_mean=2.0,
        chi2=test.statistic,
        df=test.df,
        p_value=test.p_value,
        tv=tv,
        passed=test.p_value > alpha and size_biased_ok,
        extra={"size_bias_z": {str(k): z for k, z in zs.items()}, "size_bias_ok": size_biased_ok},
        runtime=time.perf_counter() - started,
    )


# -- extreme values -----------------------------------------------------------------------


@dataclass(frozen=True)
class ExtremesRow:
    n: int
    replicates: int
    mean: float
    se: float
    prediction: float
    ratio: float


@dataclass
class ExtremesReport:
    statistic: str
    rows: list[ExtremesRow]
    runtime: float = 0.0

    def ratios(self) -> list[float]:
        return [r.ratio for r in self.rows]

    def trending_to_one(self) -> bool:
        """Distance of the ratio to 1 never grows along the grid."""
        d = [abs(r - 1.0) for r in self.ratios()]
        return all(b <= a for a, b in zip(d, d[1:]))


_PREDICTIONS = {"Dmax": exactdist.maxdegree_prediction, "Tmax": exactdist.maxtree_prediction}


def extremes_scan(statistic: str, n_grid: Sequence[int], reps: int, seed: int,
                  *, jobs: int = 1) -> ExtremesReport:
    if statistic not in _PREDICTIONS:
        raise ValidationError(f"extremes_scan handles Dmax or Tmax, got {statistic!r}")
    for n in n_grid:
        if n <= math.e**math.e:
            raise DomainError(f"n={n} is too small for the centering sequence (need n > e^e)")
    started = time.perf_counter()
    col = 0 if statistic == "Dmax" else 1
    rows = []
    for gi, n in enumerate(n_grid):
        size = block_size(n)
        # one seed per grid point keeps points independent and reproducible
        point_seed = int(np.random.SeedSequence([seed, 0xE7, gi]).generate_state(1, np.uint64)[0])
        tasks = [(n, point_seed, i, c) for i, c in _blocks(reps, size)]
        values = np.concatenate(_map(_extremes_block, tasks, jobs), axis=0)[:, col]
        mean, se = _mean_se(values)
        pred = _PREDICTIONS[statistic](n)
        rows.append(ExtremesRow(int(n), int(reps), mean, se, pred, mean / pred))
    return ExtremesReport(statistic, rows, time.perf_counter() - started)
