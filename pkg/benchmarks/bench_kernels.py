#!/usr/bin/env python3
"""Compare the compiled kernels against the pure-Python fallback.

Times the two hot loops (per-example SGD training and LinUCB scoring) at
realistic benchmark shapes and prints a speedup table, plus an end-to-end
timing of one classifier retrain.
"""

import time

import numpy as np

from seafarer.kernels import pure

try:
    from seafarer.kernels import _compiled
except ImportError:
    _compiled = None


def time_call(fn, *args, repeat=5):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def bench_sgd(n, d, epochs):
    rng = np.random.default_rng(0)
    X = np.ascontiguousarray(rng.normal(size=(n, d)))
    y = rng.integers(0, 2, size=n).astype(np.float64)
    order = np.ascontiguousarray(
        np.concatenate([rng.permutation(n) for _ in range(epochs)]), dtype=np.int64
    )
    args = (X, y, order, 3e-4, 0.9)
    rows = [("sgd pure", time_call(pure.sgd_logistic, *args))]
    if _compiled is not None:
        rows.append(("sgd compiled", time_call(_compiled.sgd_logistic, *args)))
    return rows


def bench_ucb(n_tags, k, rounds):
    rng = np.random.default_rng(1)
    M = rng.normal(size=(k, k))
    A = M @ M.T + np.eye(k)
    a_inv = np.ascontiguousarray(np.linalg.inv(A))
    theta = np.ascontiguousarray(rng.normal(size=k))
    Z = np.ascontiguousarray(rng.normal(size=(n_tags, k)))

    def loop(fn):
        for _ in range(rounds):
            fn(a_inv, theta, Z, 1.0)

    rows = [("ucb pure", time_call(loop, pure.ucb_scores))]
    if _compiled is not None:
        rows.append(("ucb compiled", time_call(loop, _compiled.ucb_scores)))
    return rows


def main() -> int:
    if _compiled is None:
        print("compiled extension not built; timing the pure fallback only\n")

    print(f"{'kernel':<14} {'shape':<28} {'best time':>10}  speedup")
    for n, d, epochs in [(12, 16, 1600), (52, 16, 1600), (102, 16, 100)]:
        rows = bench_sgd(n, d, epochs)
        base = rows[0][1]
        for name, t in rows:
            speedup = f"{base / t:5.1f}x" if name.endswith("compiled") else "  1.0x"
            print(f"{name:<14} n={n:<4} d={d} epochs={epochs:<6} {t * 1e3:9.2f}ms  {speedup}")
    for n_tags, k, rounds in [(100, 8, 200), (1000, 8, 200)]:
        rows = bench_ucb(n_tags, k, rounds)
        base = rows[0][1]
        for name, t in rows:
            speedup = f"{base / t:5.1f}x" if name.endswith("compiled") else "  1.0x"
            print(f"{name:<14} tags={n_tags:<5} k={k} rounds={rounds:<4} {t * 1e3:9.2f}ms  {speedup}")

    from seafarer.classifier import TrainConfig, train
    from seafarer.engine import LabeledSet

    rng = np.random.default_rng(2)
    feats = {f"x{i}": rng.normal(size=16) for i in range(52)}
    labeled = LabeledSet([(f"x{i}", i % 2) for i in range(52)])
    cfg = TrainConfig(learning_rate=3e-4, epochs=1600)
    t0 = time.perf_counter()
    train(labeled, feats, cfg)
    print(f"\nfull retrain (n=52, d=16, 1600 epochs): {(time.perf_counter() - t0) * 1e3:.1f}ms "
          f"on the active backend")
    return 0


if __name__ == "__main__":
    import sys

    sys.exit(main())
