#!/usr/bin/env python3
"""Benchmark the compiled pairwise-separation kernel against the fallback.

The pairwise scan dominates the brute-force diameter oracle at fine grid
resolutions; this compares the Cython kernel (when built) with the blocked
numpy implementation on point sets of the sizes the oracle actually
produces.

    python benchmarks/bench_kernels.py
"""

import sys
import time
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from saddlekit import _kernels_py  # noqa: E402
from saddlekit.kernels import HAVE_COMPILED, max_separation_pair  # noqa: E402


def time_call(fn, pts, repeats):
    best = np.inf
    out = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn(pts)
        best = min(best, time.perf_counter() - t0)
    return best, out


def main():
    rng = np.random.default_rng(0)
    print(f"compiled kernel available: {HAVE_COMPILED}")
    header = f"{'points':>8} {'dim':>4} {'numpy (s)':>12} {'compiled (s)':>13} {'speedup':>8}"
    print(header)
    print("-" * len(header))
    for n, k, repeats in ((1024, 2, 5), (4096, 2, 3), (12868, 2, 1), (4096, 3, 3)):
        pts = rng.standard_normal((n, k))
        t_py, out_py = time_call(_kernels_py.max_separation_pair, pts, repeats)
        if HAVE_COMPILED:
            t_c, out_c = time_call(max_separation_pair, pts, repeats)
            assert abs(out_py[2] - out_c[2]) <= 1e-12 * (1.0 + out_py[2])
            print(f"{n:>8} {k:>4} {t_py:>12.4f} {t_c:>13.4f} {t_py / t_c:>8.1f}x")
        else:
            print(f"{n:>8} {k:>4} {t_py:>12.4f} {'-':>13} {'-':>8}")


if __name__ == "__main__":
    main()
