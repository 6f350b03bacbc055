"""Time the product-selection kernels: numba against the numpy fallback.

Run with ``python benchmarks/bench_kernels.py [trials]``.
"""
import sys
import time

import numpy as np

from poag import _kernels
from poag.product import trial_draws


def best_of(fn, reps=5):
    times = []
    for _ in range(reps):
        t = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t)
    return min(times)


def main(trials: int = 30_000):
    H, R, u = trial_draws(0, trials, 5)
    mask = np.array([True, False, False, True, False])
    print(f"trials={trials} numba_available={_kernels.USE_NUMBA}")
    cases = [(beta, k) for beta in (1.0, np.inf) for k in (0, 2, 4)]
    for beta, k in cases:
        ref = _kernels.simulate_numpy(H, R, u, 2, k, beta)
        row = f"simulate beta={beta:<4} k={k}: numpy {best_of(lambda: _kernels.simulate_numpy(H, R, u, 2, k, beta)) * 1e3:7.2f} ms"
        if _kernels.USE_NUMBA:
            _kernels.simulate(H, R, u, 2, k, beta)  # compile
            got = _kernels.simulate(H, R, u, 2, k, beta)
            assert np.array_equal(got[1], ref[1])
            row += f"  numba {best_of(lambda: _kernels.simulate(H, R, u, 2, k, beta)) * 1e3:7.2f} ms"
        print(row)
    U = H + R
    row = f"expected payoff beta=1:   numpy {best_of(lambda: _kernels.expected_payoff_numpy(H, U, mask, 1.0)) * 1e3:7.2f} ms"
    if _kernels.USE_NUMBA:
        _kernels.expected_payoff(H, U, mask, 1.0)
        row += f"  numba {best_of(lambda: _kernels.expected_payoff(H, U, mask, 1.0)) * 1e3:7.2f} ms"
    print(row)
    t = time.perf_counter()
    trial_draws(0, trials, 5)
    print(f"per-trial draw generation: {(time.perf_counter() - t) * 1e3:.1f} ms")


if __name__ == "__main__":
    main(int(sys.argv[1]) if len(sys.argv) > 1 else 30_000)
