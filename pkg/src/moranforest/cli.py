"""Command-line interface: ``moranforest <subcommand> ...``.

Exit status is 0 on success, 1 on invalid input or usage, and 2 when an
internal consistency check fails.
"""
from __future__ import annotations

import argparse
import hashlib
import io
import json
import os
import sys
from contextlib import contextmanager
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from . import bijection, exactdist, harness, kernels, oracle, samplers
from .chain import MoranStep, run_chain
from .errors import (
    BudgetExceeded,
    IncompatibleReference,
    MoranForestError,
    SolverDegenerate,
    ValidationError,
)
from .forest import DirectedGraph, RootedForest, deserialize, serialize, stats, validate_forest
from .rng import derived_rng, fresh_seed, make_rng

OUTPUT_DIR_ENV = "MORANFOREST_OUTPUT_DIR"


class CheckFailed(Exception):
    """An internal consistency check did not hold."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_help(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


# -- formatting -------------------------------------------------------------------------


def _fmt(x) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    if isinstance(x, (list, tuple)):
        return " ".join(_fmt(v) for v in x)
    if x is None:
        return ""
    return str(x)


def _jsonable(x):
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating,)):
        return float(x)
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    return x


def _emit_table(out, columns: Sequence[str], rows: Iterable[Sequence], fmt: str, header: bool,
                meta: dict | None = None) -> None:
    rows = list(rows)
    if fmt == "json":
        doc = dict(meta or {})
        doc["rows"] = [dict(zip(columns, map(_jsonable, r))) for r in rows]
        out.write(json.dumps(_jsonable(doc), separators=(",", ":")) + "\n")
        return
    if header:
        out.write(",".join(columns) + "\n")
    for r in rows:
        out.write(",".join(_fmt(v) for v in r) + "\n")


def _resolve_output(path: str | None) -> str | None:
    if path is None or path == "-":
        return None
    base = os.environ.get(OUTPUT_DIR_ENV)
    if base and not os.path.isabs(path):
        return os.path.join(base, path)
    return path


@contextmanager
def _output(path: str | None):
    target = _resolve_output(path)
    if target is None:
        yield sys.stdout
        return
    os.makedirs(os.path.dirname(os.path.abspath(target)), exist_ok=True)
    buf = io.StringIO()
    yield buf
    with open(target, "w", encoding="utf-8") as fh:
        fh.write(buf.getvalue())


def _seed(args) -> int:
    return args.seed if args.seed is not None else fresh_seed()


def _int_list(text: str) -> list[int]:
    try:
        return [int(t) for t in text.replace(",", " ").split()]
    except ValueError as exc:
        raise ValidationError(f"expected integers, got {text!r}") from exc


# -- sample ---------------------------------------------------------------------------------


def _cmd_sample(args) -> int:
    seed = _seed(args)
    n, count = args.n, args.count
    if count < 1:
        raise ValidationError("--count must be >= 1")
    sampler = args.sampler
    if sampler != "local_limit" and n is None:
        raise ValidationError("--n is required for this sampler")
    size = harness.block_size(n or 1, "local_limit" if sampler == "local_limit" else "ua")
    tasks = [(sampler, n, seed, i, c) for i, c in harness._blocks(count, size)]
    blocks = harness._map(_sample_block, tasks, args.jobs)
    with _output(args.output) as out:
        if sampler == "local_limit":
            rows = [r for b in blocks for r in b.tolist()]
            _emit_table(out, ("focal_degree", "component_size"), rows, args.format, args.header)
            return 0
        forests = [RootedForest(n, tuple(row)) for b in blocks for row in b.tolist()]
        if args.stats:
            cols = ("n", "num_trees", "num_edges", "max_degree", "max_tree_size", "tree_sizes")
            if args.format == "json":
                for f in forests:
                    out.write(stats(f).to_json() + "\n")
            else:
                rows = []
                for f in forests:
                    d = stats(f).to_dict()
                    rows.append([d[c] for c in cols])
                _emit_table(out, cols, rows, "csv", args.header)
        else:
            for f in forests:
                if args.format == "json":
                    out.write(json.dumps({"n": f.n, "parents": list(f.parent)}, separators=(",", ":")) + "\n")
                else:
                    out.write(serialize(f) + "\n")
    return 0


def _sample_block(task) -> np.ndarray:
    sampler, n, seed, index, count = task
    rng = derived_rng(seed, index)
    if sampler == "local_limit":
        return samplers.local_limit_batch(count, rng)
    if sampler == "rooted_tree":
        return samplers.uniform_tree_batch(n, count, rng)
    return samplers.SAMPLERS[sampler](n, count, rng)


# -- chain -----------------------------------------------------------------------------------


def _parse_script(text: str) -> list[MoranStep]:
    steps = []
    for chunk in text.replace(";", " ").split():
        parts = chunk.split(",")
        if len(parts) != 2:
            raise ValidationError(f"bad step {chunk!r}; use u,v")
        steps.append(MoranStep(int(parts[0]), int(parts[1])))
    return steps


def _cmd_chain(args) -> int:
    if args.steps < 0:
        raise ValidationError("--steps must be >= 0")
    if args.start_forest:
        f = deserialize(args.start_forest)
        g0 = f.to_graph()
    elif args.n is None or args.n < 1:
        raise ValidationError("--n >= 1 is required unless --start-forest is given")
    elif args.start == "complete":
        g0 = DirectedGraph.complete(args.n)
    else:
        g0 = DirectedGraph.empty(args.n)
    script = _parse_script(args.script) if args.script else None
    if script is not None and len(script) < args.steps:
        raise ValidationError(f"script has {len(script)} steps, fewer than --steps {args.steps}")
    rng = None if script is not None else make_rng(_seed(args))

    with _output(args.output) as out:
        def state_doc(g: DirectedGraph) -> dict:
            edges = sorted(g.edges)
            if args.trace == "hash":
                h = hashlib.sha256(json.dumps(edges).encode()).hexdigest()[:16]
                return {"hash": h}
            return {"edges": [list(e) for e in edges]}

        def on_step(t, step, g):
            if args.trace == "none":
                return
            doc = {"t": t, "u": step.u, "v": step.v, "forest": g.is_forest()}
            doc.update(state_doc(g))
            out.write(json.dumps(doc, separators=(",", ":")) + "\n")

        run = run_chain(g0, args.steps, rng, script=script, on_step=on_step)
        final = {"final": True, "steps": run.steps, "absorbed_at": run.absorbed_at,
                 "forest": run.graph.is_forest()}
        if run.graph.is_forest():
            final["parents"] = serialize(validate_forest(run.graph))
        else:
            final.update(state_doc(run.graph))
        out.write(json.dumps(final, separators=(",", ":")) + "\n")
    return 0


# -- exact -----------------------------------------------------------------------------------


def _need(args, *names):
    for name in names:
        if getattr(args, name) is None:
            raise ValidationError(f"--{name.replace('_', '-')} is required for this law")


def _pmf_rows(pmf) -> list:
    return [(k, p) for k, p in pmf.items()]


def _cmd_exact(args) -> int:
    law = args.law
    meta = {"law": law}
    cols: tuple = ("k", "prob")
    if law == "ntrees":
        _need(args, "n")
        rows = _pmf_rows(exactdist.ntrees_pmf(args.n, args.backend))
    elif law == "ntrees-via-a":
        _need(args, "n")
        rows = _pmf_rows(exactdist.ntrees_pmf_via_a(args.n))
    elif law == "a-table":
        _need(args, "m")
        cols = ("k", "count")
        rows = list(enumerate(exactdist.a_table(args.m)))
    elif law == "degree":
        _need(args, "n")
        rows = _pmf_rows(exactdist.degree_pmf(args.n, args.backend))
    elif law == "degree-limit":
        rows = _pmf_rows(exactdist.degree_limit_pmf(args.kmax))
    elif law == "degree-tail":
        cols = ("k", "tail")
        rows = [(k, exactdist.degree_limit_tail(k)) for k in range(0, args.kmax + 1)]
    elif law == "degree-bounds":
        cols = ("k", "lower", "upper")
        rows = [(k, *exactdist.degree_tail_bounds(k)) for k in range(1, args.kmax + 1)]
    elif law == "yule":
        _need(args, "n", "ell")
        rows = _pmf_rows(exactdist.yule_law(args.n, args.variant, args.backend).pmf_at(args.ell))
    elif law == "sandwich":
        _need(args, "n", "ell")
        cols = ("k", "lower", "upper")
        top = min(args.kmax, args.n - 2)
        rows = [(k, *exactdist.yule_sandwich(args.n, args.ell, k)) for k in range(0, top + 1)]
    elif law == "h1":
        _need(args, "n")
        rows = _pmf_rows(exactdist.h1_pmf(args.n))
    elif law == "t1-given-h":
        _need(args, "n", "h")
        rows = _pmf_rows(exactdist.t1_conditional(args.n, args.h, args.backend))
    elif law == "t1":
        _need(args, "n")
        rows = _pmf_rows(exactdist.t1_pmf(args.n, args.backend))
    elif law == "tree-limit":
        f = exactdist.limit_treeU_pmf if args.which == "uniform" else exactdist.limit_tree1_pmf
        rows = [(k, f(k)) for k in range(1, args.kmax + 1)]
    elif law == "tree-tail":
        _need(args, "n")
        cols = ("k", "exact", "asymptotic", "ratio")
        rows = []
        for k in range(1, args.kmax + 1):
            ex, asy = exactdist.tree_tail_exact(args.n, k), exactdist.tree_tail_asymptotic(k)
            rows.append((k, ex, asy, ex / asy))
    elif law == "predictions":
        _need(args, "n")
        cols = ("n", "maxdegree", "maxtree")
        rows = [(args.n, exactdist.maxdegree_prediction(args.n), exactdist.maxtree_prediction(args.n))]
    elif law == "clt":
        _need(args, "n")
        dist = exactdist.clt_normalized_dist(args.n)
        cols = ("x", "prob")
        rows = list(zip(dist.points.tolist(), dist.probs.tolist()))
        meta["ks"] = exactdist.ks_to_normal(dist)
    elif law == "clt-ks":
        _need(args, "n")
        cols = ("n", "ks")
        rows = [(args.n, exactdist.ks_to_normal(exactdist.clt_normalized_dist(args.n)))]
    else:  # pragma: no cover - argparse restricts choices
        raise ValidationError(f"unknown law {law}")
    with _output(args.output) as out:
        _emit_table(out, cols, rows, args.format, args.header, meta)
    return 0


# -- bijection -------------------------------------------------------------------------------


def _cmd_bijection(args) -> int:
    with _output(args.output) as out:
        if args.self_test:
            n = args.n or 6
            results = _bijection_self_test(n)
            _print_checks(out, results)
            if not all(ok for _, ok in results):
                raise CheckFailed("bijection self-test failed")
            return 0
        if args.phi is not None:
            u = tuple(_int_list(args.phi))
            n = len(u) + 2
            v = bijection.theta(u, n)
            tree = bijection.psi(v, n)
            doc = {
                "theta": list(v),
                "cycles": [list(c) for c in bijection.cycles(v, n)],
                "cycle_word": list(bijection.cycle_word(v, n)),
                "root_path": list(bijection.root_path(tree)),
                "tree": serialize(tree),
            }
            if args.format == "json":
                out.write(json.dumps(doc, separators=(",", ":")) + "\n")
            else:
                out.write(serialize(tree) + "\n")
            return 0
        if args.phi_inv is not None:
            tree = deserialize(args.phi_inv)
            if len(tree.roots) != 1:
                raise ValidationError("phi-inv needs a single rooted tree")
            u = bijection.phi_inv(tree)
            if args.format == "json":
                out.write(json.dumps({"u": list(u)}, separators=(",", ":")) + "\n")
            else:
                out.write(",".join(map(str, u)) + "\n")
            return 0
    raise ValidationError("give one of --phi, --phi-inv or --self-test")


def _bijection_self_test(n: int) -> list[tuple[str, bool]]:
    if n < 3:
        raise ValidationError("self-test needs n >= 3")
    if n > 8:
        raise ValidationError("self-test enumerates (n-1)^(n-2) vectors; use n <= 8")
    images = set()
    round_trip = edges_ok = True
    for u in bijection.restricted_vectors(n):
        tree = bijection.phi(u, n)
        images.add(tree.parent)
        round_trip &= bijection.phi_inv(tree) == u
        edges_ok &= tree.increasing_edges() == bijection.increasing_pairs(u)
    return [
        (f"phi_inv(phi(u)) == u for all u, n={n}", round_trip),
        (f"increasing edges preserved, n={n}", edges_ok),
        (f"image size == (n-1)^(n-2) = {(n - 1) ** (n - 2)}", len(images) == (n - 1) ** (n - 2)),
    ]


# -- verify ----------------------------------------------------------------------------------


def _print_checks(out, results) -> None:
    width = max(len(name) for name, _ in results)
    for name, ok in results:
        status = "PASS" if ok is True else ("SKIP" if ok is None else "FAIL")
        out.write(f"{name.ljust(width)}: {status}\n")


def verify_suite(n: int) -> list[tuple[str, bool | None]]:
    """Oracle cross-checks at ``n``; ``None`` marks checks skipped at this size."""
    if n < 2 or n > 5:
        raise ValidationError(f"verify supports 2 <= n <= 5, got {n}")
    results: list[tuple[str, bool | None]] = []
    ua = oracle.ua_exact(n)
    if n <= 4:
        stat = oracle.stationary_solve(n)
        results.append(("stationary == ua_exact", stat.tv(ua) == 0))
        for name, fn in oracle.CORE_EXACT.items():
            results.append((f"{name} sampler core == ua_exact", fn(n).tv(ua) == 0))
    else:
        results.append(("stationary == ua_exact", None))
    results.append((f"support size == {oracle.expected_support_size(n)}",
                    len(ua) == oracle.expected_support_size(n)))
    results.append(("ua_exact exchangeable", oracle.is_exchangeable(ua)))
    results.append(("marginal N == ntrees_pmf", oracle.marginal(ua, "num_trees") == exactdist.ntrees_pmf(n)))
    results.append(("marginal degree1 == degree_pmf",
                    oracle.marginal(ua, "degree1") == exactdist.degree_pmf(n)))
    results.append(("marginal T1 == t1_pmf", oracle.marginal(ua, "tree1") == exactdist.t1_pmf(n)))
    results.append((f"a_table({n}) == rooted-tree count",
                    oracle.count_trees_by_increasing_edges(n) == exactdist.a_table(n)))
    return results


def _cmd_verify(args) -> int:
    results = verify_suite(args.n)
    with _output(args.output) as out:
        _print_checks(out, results)
    if any(ok is False for _, ok in results):
        raise CheckFailed("oracle verification failed")
    return 0


# -- mc / asymptotics ------------------------------------------------------------------------

_MC_COLUMNS = ("statistic", "n", "replicates", "mean", "mean_se", "reference_mean",
               "chi2", "df", "p_value", "tv", "passed")


def _cmd_mc(args) -> int:
    seed = _seed(args)
    sampler = "local_limit" if args.statistic == "local_degree" else args.sampler
    e = harness.Experiment(args.n, args.reps, args.statistic, sampler, seed)
    if args.statistic == "TU":
        report = harness.uniform_tree_statistic(e, jobs=args.jobs)
    else:
        report = harness.run(e, jobs=args.jobs)
    print(f"runtime: {report.runtime:.3f} s", file=sys.stderr)
    with _output(args.output) as out:
        if args.format == "json":
            out.write(json.dumps(_jsonable(report.to_dict()), separators=(",", ":")) + "\n")
        elif args.table:
            ks = range(report.empirical.lo, report.empirical.hi + 1)
            rows = [(k, float(report.empirical[k]), float(report.reference[k])) for k in ks]
            _emit_table(out, ("k", "empirical", "reference"), rows, "csv", args.header)
        else:
            d = report.to_dict()
            _emit_table(out, _MC_COLUMNS, [[d[c] for c in _MC_COLUMNS]], "csv", args.header)
    if args.check and not report.passed:
        raise CheckFailed("goodness-of-fit check failed")
    return 0


def _cmd_asymptotics(args) -> int:
    seed = _seed(args)
    grid = _int_list(args.n_grid)
    report = harness.extremes_scan(args.statistic, grid, args.reps, seed, jobs=args.jobs)
    print(f"runtime: {report.runtime:.3f} s", file=sys.stderr)
    cols = ("n", "replicates", "mean", "se", "prediction", "ratio")
    rows = [[getattr(r, c) for c in cols] for r in report.rows]
    meta = {"statistic": report.statistic, "trending_to_one": report.trending_to_one()}
    with _output(args.output) as out:
        _emit_table(out, cols, rows, args.format, args.header, meta)
    return 0


# -- parser ------------------------------------------------------------------------------------


def _common(p, *, seeded: bool, header_default: bool) -> None:
    if seeded:
        p.add_argument("--seed", type=int, default=None,
                       help="master seed; when omitted a fresh one is drawn and logged to stderr")
    p.add_argument("--jobs", type=int, default=1,
                   help="worker processes (never changes the output)")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--output", "-o", default=None,
                   help=f"write to this file; relative paths are resolved against ${OUTPUT_DIR_ENV} if set")
    if header_default:
        p.add_argument("--no-header", dest="header", action="store_false",
                       help="omit the CSV header line")
    else:
        p.add_argument("--header", action="store_true", help="print a CSV header line")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="moranforest", description="Sample, compute and test Moran forests.")
    parser.add_argument("--backend-info", action="store_true",
                        help="print which kernel backend is active and exit")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")

    p = sub.add_parser("sample", help="draw forests (parent arrays) or their statistics")
    p.add_argument("--n", type=int, default=None, help="number of vertices")
    p.add_argument("--count", type=int, default=1)
    p.add_argument("--sampler", default="ua",
                   choices=("ua", "backward", "uniform_tree", "rooted_tree", "local_limit"))
    p.add_argument("--stats", action="store_true", help="emit per-forest statistics instead of parents")
    _common(p, seeded=True, header_default=False)
    p.set_defaults(func=_cmd_sample)

    p = sub.add_parser("chain", help="run the Markov chain and trace it as JSON lines")
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--steps", type=int, required=True)
    p.add_argument("--start", choices=("empty", "complete"), default="empty")
    p.add_argument("--start-forest", default=None, help='initial forest as "n p1 ... pn"')
    p.add_argument("--script", default=None, help='fixed steps, e.g. "1,2 1,3 1,4"')
    p.add_argument("--trace", choices=("full", "hash", "none"), default="full")
    _common(p, seeded=True, header_default=False)
    p.set_defaults(func=_cmd_chain)

    p = sub.add_parser("exact", help="exact and limiting laws as CSV tables")
    p.add_argument("law", choices=(
        "ntrees", "ntrees-via-a", "a-table", "degree", "degree-limit", "degree-tail",
        "degree-bounds", "yule", "sandwich", "h1", "t1-given-h", "t1", "tree-limit",
        "tree-tail", "predictions", "clt", "clt-ks"))
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--m", type=int, default=None)
    p.add_argument("--ell", type=int, default=None)
    p.add_argument("--h", type=int, default=None)
    p.add_argument("--kmax", type=int, default=20)
    p.add_argument("--variant", choices=("plain", "size_biased"), default="plain")
    p.add_argument("--which", choices=("uniform", "vertex1"), default="uniform")
    p.add_argument("--backend", choices=("rational", "float"), default="rational")
    _common(p, seeded=False, header_default=False)
    p.set_defaults(func=_cmd_exact)

    p = sub.add_parser("bijection", help="apply the vector/tree bijection or self-test it")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--phi", default=None, help="restricted vector u_2..u_{n-1}, comma separated")
    g.add_argument("--phi-inv", default=None, help='rooted tree as "m p1 ... pm"')
    g.add_argument("--self-test", action="store_true", help="exhaustive round-trip check")
    p.add_argument("--n", type=int, default=None, help="size for --self-test (default 6)")
    _common(p, seeded=False, header_default=False)
    p.set_defaults(func=_cmd_bijection)

    p = sub.add_parser("verify", help="run the brute-force oracle suite")
    p.add_argument("--n", type=int, default=4)
    _common(p, seeded=False, header_default=False)
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("mc", help="Monte Carlo goodness-of-fit experiment")
    p.add_argument("--statistic", choices=harness.STATISTICS, default="N")
    p.add_argument("--n", type=int, default=100)
    p.add_argument("--reps", type=int, default=10000)
    p.add_argument("--sampler", choices=("ua", "backward", "uniform_tree"), default="ua")
    p.add_argument("--table", action="store_true", help="emit the pmf table instead of the summary")
    p.add_argument("--check", action="store_true", help="exit 2 if the test fails")
    _common(p, seeded=True, header_default=True)
    p.set_defaults(func=_cmd_mc)

    p = sub.add_parser("asymptotics", help="largest degree / largest tree against their centerings")
    p.add_argument("--statistic", choices=("Dmax", "Tmax"), default="Tmax")
    p.add_argument("--n-grid", default="1000,10000,100000")
    p.add_argument("--reps", type=int, default=200)
    _common(p, seeded=True, header_default=True)
    p.set_defaults(func=_cmd_asymptotics)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.backend_info:
        print(kernels.BACKEND)
        return 0
    if args.command is None:
        parser.print_help(sys.stderr)
        return 1
    if getattr(args, "jobs", 1) < 1:
        print("moranforest: --jobs must be >= 1", file=sys.stderr)
        return 1
    try:
        return args.func(args)
    except CheckFailed as exc:
        print(f"moranforest: {exc}", file=sys.stderr)
        return 2
    except SolverDegenerate as exc:
        print(f"moranforest: internal check failed: {exc}", file=sys.stderr)
        return 2
    except (ValidationError, IncompatibleReference, BudgetExceeded) as exc:
        print(f"moranforest: {exc}", file=sys.stderr)
        return 1
    except MoranForestError as exc:  # pragma: no cover
        print(f"moranforest: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
