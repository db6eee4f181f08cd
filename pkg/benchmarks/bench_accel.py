"""Compare the numba kernels in isocov._accel with their numpy twins.

    python benchmarks/bench_accel.py [--repeat 5]

Prints best-of-N wall time for each backend, the speedup, and the largest
absolute difference between the two outputs.
"""

import argparse
import time

import numpy as np

from isocov import _accel


def best_of(fn, repeat):
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def cases(rng):
    alpha, beta = 0.5, -0.5
    x = rng.uniform(-1, 1, 20_000)
    A, B, C = _accel.jacobi_recurrence_coeffs(60, alpha, beta)
    yield ("jacobi_table n=60, 2e4 nodes",
           lambda: _accel._jacobi_table_nb(60, alpha, beta, x, A, B, C),
           lambda: _accel.jacobi_table_numpy(60, alpha, beta, x))

    xs = rng.uniform(-1, 1, (2_000, 20))
    W = rng.standard_normal((2_000, 41, 2))
    A, B, C = _accel.jacobi_recurrence_coeffs(40, 0.0, 0.0)
    yield ("series_accumulate R=2000, 20 pts, n=40, m=2",
           lambda: _accel._series_accumulate_nb(xs, W, 0.0, 0.0, A, B, C),
           lambda: _accel.series_accumulate_numpy(xs, W, 0.0, 0.0))

    omega = np.linspace(0, 120, 1024)
    q = np.sort(rng.uniform(0, np.pi, 2_000))
    F = rng.standard_normal((2_000, 3))
    k = 1
    yield ("bessel_sum 1024 omegas, 2000 nodes, k=1",
           lambda: _accel._bessel_sum_nb(omega, q, F, k, _accel._series_threshold(k),
                                         1.0 / _accel._double_factorial(2 * k + 1)),
           lambda: _accel.bessel_sum_numpy(omega, q, F, k))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    if not _accel.HAVE_NUMBA:
        raise SystemExit("numba is not installed; nothing to compare")
    rng = np.random.default_rng(args.seed)
    print(f"{'kernel':48s} {'numba s':>10s} {'numpy s':>10s} {'speedup':>8s} {'max |diff|':>11s}")
    for name, fast, slow in cases(rng):
        fast()  # compile outside the timing
        t_nb, a = best_of(fast, args.repeat)
        t_np, b = best_of(slow, args.repeat)
        diff = float(np.max(np.abs(a - b)))
        print(f"{name:48s} {t_nb:10.4f} {t_np:10.4f} {t_np / t_nb:8.1f} {diff:11.2e}")


if __name__ == "__main__":
    main()
