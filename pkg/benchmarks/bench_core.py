"""Compiled core vs numpy fallback on the three hot kernels.

    python benchmarks/bench_core.py [--repeat N] [--json out.json]
"""

import argparse
import json
import platform
import timeit

import numpy as np

from drowsiness.classify import ForestParams, KernelSpec, gram, train_random_forest
from drowsiness.classify import _pycore

try:
    from drowsiness.classify import _ccore
except ImportError:          # extension not built
    _ccore = None


def cases():
    rng = np.random.default_rng(0)
    X = rng.normal(size=(600, 20))
    y = np.where(X[:, 0] + 0.8 * rng.normal(size=600) > 0, 1.0, -1.0)
    K = gram(KernelSpec("rbf", gamma=0.05), X)
    yield "smo_solve n=600 rbf", lambda core: core.smo_solve(K, y, 1.0, 1e-3, 600_000)

    Xs = rng.normal(size=(3000, 35))
    ys = rng.integers(0, 3, size=3000).astype(np.intp)
    w = np.ones(3000)
    idx = np.arange(3000)
    feats = np.arange(6)
    yield "best_split n=3000 6 features", lambda core: core.best_split(Xs, idx, w, ys, feats, 3)

    forest = train_random_forest(Xs, list(ys), ForestParams(n_trees=100, seed=0))
    flat = forest._flatten()[:5]
    probe = rng.normal(size=(1, 35))
    yield "forest_apply 100 trees, 1 sample", lambda core: core.forest_apply(*flat, probe)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--json")
    args = ap.parse_args()
    backends = {"python": _pycore}
    if _ccore is not None:
        backends["compiled"] = _ccore
    results = []
    print(f"{'case':36s} " + " ".join(f"{b:>12s}" for b in backends) + "   speedup")
    for name, fn in cases():
        row = {"case": name}
        for b, core in backends.items():
            number = max(1, int(0.2 / max(timeit.timeit(lambda: fn(core), number=1), 1e-7)))
            best = min(timeit.repeat(lambda: fn(core), number=number, repeat=args.repeat)) / number
            row[b] = best * 1e3
        speed = row["python"] / row["compiled"] if "compiled" in row else float("nan")
        row["speedup"] = speed
        results.append(row)
        print(f"{name:36s} " + " ".join(f"{row[b]:10.3f}ms" for b in backends) + f"   {speed:6.1f}x")
    if args.json:
        with open(args.json, "w") as fh:
            json.dump({"machine": platform.machine(), "python": platform.python_version(), "results": results},
                      fh, indent=2)


if __name__ == "__main__":
    main()
