"""Timing comparison for the factor-training SGD kernel.

Runs identical training jobs through the numba-compiled kernel and the
plain-python fallback (the one selected by ``FMREC_NUMBA=0``), checks
that both produce the same factors, and reports the speedup.

Usage: python benchmarks/bench_sgd.py [--users N] [--features M]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from fmrec import _accel
from fmrec.factorize import InteractionMatrix, TrainConfig, _run_sgd, predict, rmse


def synthetic_matrix(users: int, features: int, rank: int, density: float, seed: int) -> InteractionMatrix:
    rng = np.random.default_rng(seed)
    left = rng.uniform(0.0, 1.0, (users, rank))
    right = rng.uniform(0.0, 1.0, (rank, features))
    cells = left @ right / rank
    cells[rng.uniform(size=cells.shape) > density] = np.nan
    # keep every row and column observed so the matrix stays trainable
    cells[:, 0] = (left @ right)[:, 0] / rank
    cells[0, :] = (left @ right)[0, :] / rank
    return InteractionMatrix(
        tuple(f"u{i}" for i in range(users)),
        tuple(f"f{j}" for j in range(features)),
        cells,
    )


def run(kernel, matrix, config, repeats: int) -> tuple[float, object]:
    best = float("inf")
    pair = None
    for _ in range(repeats):
        started = time.perf_counter()
        pair = _run_sgd(matrix, config, kernel)
        best = min(best, time.perf_counter() - started)
    return best, pair


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--users", type=int, default=300)
    parser.add_argument("--features", type=int, default=200)
    parser.add_argument("--rank", type=int, default=8)
    parser.add_argument("--density", type=float, default=0.6)
    parser.add_argument("--epochs", type=int, default=30)
    parser.add_argument("--repeats", type=int, default=3)
    args = parser.parse_args()

    matrix = synthetic_matrix(args.users, args.features, args.rank, args.density, seed=1)
    config = TrainConfig(k=args.rank, rate=0.05, reg=0.001, epochs=args.epochs, seed=42)
    observed = int(matrix.observed().sum())
    print(f"matrix {args.users}x{args.features}, {observed} observed cells, k={args.rank}, {args.epochs} epochs")

    python_time, python_pair = run(_accel.sgd_epoch_python, matrix, config, args.repeats)
    print(f"python kernel: {python_time:8.3f}s  (rmse {rmse(matrix, predict(python_pair)):.4f})")

    if _accel.sgd_epoch_numba is None:
        print("numba kernel unavailable (FMREC_NUMBA=0 or numba missing); nothing to compare")
        return

    _run_sgd(matrix, TrainConfig(k=args.rank, epochs=1, seed=0), _accel.sgd_epoch_numba)  # warm up JIT
    numba_time, numba_pair = run(_accel.sgd_epoch_numba, matrix, config, args.repeats)
    print(f"numba kernel:  {numba_time:8.3f}s  (rmse {rmse(matrix, predict(numba_pair)):.4f})")

    same = np.allclose(python_pair.user_factors, numba_pair.user_factors, atol=1e-12) and np.allclose(
        python_pair.feature_factors, numba_pair.feature_factors, atol=1e-12
    )
    print(f"factors identical across kernels: {same}")
    print(f"speedup: {python_time / numba_time:.1f}x")


if __name__ == "__main__":
    main()
