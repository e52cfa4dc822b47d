"""Time the compiled and numpy kernels on the same matrix and check they agree.

    python benchmarks/bench_kernels.py                 # ML-100K if present, else synthetic
    python benchmarks/bench_kernels.py --data u.data --repeat 5
"""

import argparse
import sys
import time
from pathlib import Path

import numpy as np

from cruc import _backend
from cruc.coldstart import cluster_users, select_significant_users, smooth
from cruc.ingestion import parse_movielens
from cruc.matrix import RatingScale, build_matrix
from cruc.predictors import predict_components
from cruc.similarity import build_similarity_model

DEFAULT_DATA = Path(__file__).resolve().parents[1] / "data" / "ml-100k" / "u.data"


def synthetic(n_users=1000, n_items=1700, n_ratings=100_000, seed=0):
    rng = np.random.default_rng(seed)
    # skewed activity so that a few users and items dominate, as in real rating logs
    u = np.minimum((rng.pareto(1.2, n_ratings * 2) * 40).astype(int), n_users - 1)
    i = np.minimum((rng.pareto(1.0, n_ratings * 2) * 30).astype(int), n_items - 1)
    keys = np.unique(u * n_items + i)[:n_ratings]
    r = rng.integers(1, 6, len(keys)).astype(float)
    return [(int(k // n_items), int(k % n_items), float(x)) for k, x in zip(keys, r)]


def best_of(fn, repeat):
    times, out = [], None
    for _ in range(repeat):
        start = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - start)
    return min(times), out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--data", default=str(DEFAULT_DATA))
    ap.add_argument("--m", type=int, default=30)
    ap.add_argument("--k", type=int, default=30)
    ap.add_argument("--queries", type=int, default=20_000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)

    if Path(args.data).is_file():
        triples, _ = parse_movielens(args.data)
        source = args.data
    else:
        triples = synthetic()
        source = "synthetic"
    matrix = build_matrix(triples, RatingScale(1, 5))
    print(f"data: {source} ({matrix.n_users} users, {matrix.n_items} items, {matrix.n_ratings} ratings)")

    sig = select_significant_users(matrix)
    store = smooth(matrix, cluster_users(matrix, sig, min(16, len(sig)), 100, 0))
    rng = np.random.default_rng(1)
    users = rng.integers(0, matrix.n_users, args.queries)
    items = rng.integers(0, matrix.n_items, args.queries)

    impls = _backend.implementations()
    if "cython" not in impls:
        print("compiled extension not built; timing the numpy fallback only", file=sys.stderr)
    results = {}
    for name, impl in sorted(impls.items()):
        t_sim, model = best_of(
            lambda: build_similarity_model(matrix, args.m, args.k, user_candidates=sig.mask(matrix.n_users), backend=impl),
            args.repeat,
        )
        t_pred, comps = best_of(lambda: predict_components(store, model, users, items, impl), args.repeat)
        results[name] = (t_sim, t_pred, model, comps)
        print(f"{name:>7}: neighborhoods {t_sim * 1e3:8.1f} ms   {args.queries} predictions {t_pred * 1e3:8.1f} ms")

    if len(results) == 2:
        (ts_c, tp_c, mc, pc), (ts_p, tp_p, mp, pp) = results["cython"], results["python"]
        same = all(np.array_equal(getattr(mc, f), getattr(mp, f)) for f in ("item_idx", "user_idx", "item_sim", "user_sim"))
        worst = max(float(np.nanmax(np.abs(a - b), initial=0.0)) for a, b in zip(pc, pp))
        print(f"speedup: neighborhoods x{ts_p / ts_c:.1f}, predictions x{tp_p / tp_c:.1f}")
        print(f"neighborhoods identical: {same}; max prediction difference {worst:.2e}")


if __name__ == "__main__":
    main()
