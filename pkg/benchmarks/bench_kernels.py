"""Time the numba kernels against their numpy fallbacks.

Run with ``python3 benchmarks/bench_kernels.py [--quick]``.  Each kernel is
called once to trigger compilation, then timed as the best of a few repeats
on identical inputs.  Outputs are compared so a speedup never hides a
divergence.
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from moranforest import samplers
from moranforest.kernels import load_backend


def best_of(fn, repeats: int) -> float:
    best = float("inf")
    for _ in range(repeats):
        t = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t)
    return best


def cases(quick: bool):
    rng = np.random.default_rng(12345)
    scale = 1 if quick else 4
    n, B = 10_000, 50 * scale
    u = samplers.ua_vector(n, rng, B)
    b1 = rng.integers(1, n + 1, size=B)
    pick = rng.random(B)
    parents = samplers.ua_batch(n, B, rng)
    m = 2_000
    words = rng.integers(1, m + 1, size=(20 * scale, m - 2))
    roots = rng.integers(1, m + 1, size=20 * scale)
    nb = 200
    V = rng.integers(1, nb + 1, size=(500 * scale, 4 * nb * 6))
    W = rng.integers(1, nb, size=V.shape)
    W = W + (W >= V)

    def backward(k):
        rank = np.zeros((V.shape[0], nb + 1), dtype=np.int64)
        mother = np.zeros_like(rank)
        nseen = np.zeros(V.shape[0], dtype=np.int64)
        steps = np.zeros(V.shape[0], dtype=np.int64)
        k.backward_consume(V, W, rank, mother, nseen, steps, 0)
        return k.backward_parents(rank, mother)

    yield "ua_summary", f"n={n} B={B}", lambda k: k.ua_summary(u, b1, pick)
    yield "ua_extremes", f"n={n} B={B}", lambda k: k.ua_extremes(u)
    yield "forest_summary", f"n={n} B={B}", lambda k: k.forest_summary(parents)
    yield "prufer_parents", f"m={m} B={roots.size}", lambda k: k.prufer_parents(words, roots, m)
    yield "backward", f"n={nb} B={V.shape[0]}", backward
    draws = 20_000 * scale
    yield (
        "local_limit",
        f"draws={draws}",
        lambda k: k.local_limit_batch(draws, np.random.default_rng(7), 10**6),
    )


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--quick", action="store_true", help="smaller inputs")
    ap.add_argument("--repeats", type=int, default=3)
    args = ap.parse_args()
    fast, slow = load_backend("numba"), load_backend("numpy")
    print(f"{'kernel':<16} {'input':<18} {'numpy [s]':>10} {'numba [s]':>10} {'speedup':>8}  same")
    for name, label, call in cases(args.quick):
        a = call(fast)  # compile
        b = call(slow)
        same = "yes" if name == "local_limit" or np.array_equal(a, b) else "NO"
        t_fast = best_of(lambda: call(fast), args.repeats)
        t_slow = best_of(lambda: call(slow), args.repeats)
        print(f"{name:<16} {label:<18} {t_slow:>10.4f} {t_fast:>10.4f} {t_slow / t_fast:>8.1f}  {same}")
    print("local_limit draws different streams per backend; only its law is shared")


if __name__ == "__main__":
    main()
