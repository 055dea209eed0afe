"""Compare the compiled kernels against the numpy fallback.

Run:  python3 benchmarks/kernel_bench.py
The fallback can be forced at import with LOGIFOLD_PURE_PYTHON=1, so this
script instead imports the two implementations directly and times the
batch pair-sum kernel, the hot path of every entropy sweep.
"""

from __future__ import annotations

import time

import numpy as np

from logifold._kernels import reference

try:
    from logifold._kernels import _speedups
except ImportError:
    _speedups = None


def make_batch(k: int, n: int, t: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    p = rng.dirichlet(np.full(t, 2.0), size=(k, n))
    return np.ascontiguousarray(np.transpose(p, (0, 1, 2)))


def time_backend(fn, batch: np.ndarray, repeats: int) -> float:
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn(batch)
        best = min(best, time.perf_counter() - start)
    return best


def main() -> None:
    shapes = [(4, 1000, 4), (8, 5000, 10), (16, 20000, 10)]
    repeats = 5
    print(f"{'shape (k,n,t)':>18} {'numpy':>12} {'compiled':>12} {'speedup':>9}")
    for k, n, t in shapes:
        batch = make_batch(k, n, t, seed=1)
        ref = reference.batch_pair_cross_total_nats(batch)
        t_ref = time_backend(reference.batch_pair_cross_total_nats, batch,
                             repeats)
        if _speedups is None:
            print(f"{(k, n, t)!s:>18} {t_ref * 1e3:>10.2f}ms {'absent':>12}")
            continue
        fast = _speedups.batch_pair_cross_total_nats(batch)
        assert np.allclose(ref, fast, rtol=1e-12, atol=1e-12), "backends disagree"
        t_fast = time_backend(_speedups.batch_pair_cross_total_nats, batch,
                              repeats)
        print(f"{(k, n, t)!s:>18} {t_ref * 1e3:>10.2f}ms "
              f"{t_fast * 1e3:>10.2f}ms {t_ref / t_fast:>8.1f}x")


if __name__ == "__main__":
    main()
