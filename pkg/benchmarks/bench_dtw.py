"""Benchmark the compiled DTW kernel against the pure-Python fallback.

Runs the banded dynamic program and the full multilevel approximation
with both kernels on identical inputs, checks that they agree, and
prints a timing table.

Usage: python3 benchmarks/bench_dtw.py [--repeats N]
"""

import argparse
import time

import numpy as np

from cmssa import _dtw_py
from cmssa.dtw import _fastdtw, _full_band

try:
    from cmssa import _dtw_cy
except ImportError:
    _dtw_cy = None


def _series(rng, length, channels):
    t = np.arange(length)
    base = np.sin(2 * np.pi * rng.uniform(0.01, 0.05) * t)[:, None]
    return np.ascontiguousarray(base + 0.1 * rng.normal(size=(length, channels)))


def _time(fn, repeats):
    best = np.inf
    result = None
    for _ in range(repeats):
        start = time.perf_counter()
        result = fn()
        best = min(best, time.perf_counter() - start)
    return best, result


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=3)
    args = parser.parse_args()

    if _dtw_cy is None:
        print("compiled kernel unavailable; nothing to compare")
        return 1

    rng = np.random.default_rng(0)
    rows = []
    cases = [
        ("full band", 200, 1, None),
        ("full band", 400, 1, None),
        ("full band", 400, 3, None),
        ("fastdtw r=1", 2000, 1, 1),
        ("fastdtw r=1", 5000, 1, 1),
        ("fastdtw r=2", 5000, 3, 2),
    ]
    for name, length, channels, radius in cases:
        a = _series(rng, length, channels)
        b = _series(rng, length + length // 10, channels)
        if radius is None:
            band = _full_band(a.shape[0], b.shape[0])
            run_py = lambda: _dtw_py.dtw_banded(a, b, *band)
            run_cy = lambda: _dtw_cy.dtw_banded(a, b, *band)
        else:
            run_py = lambda: _fastdtw(a, b, radius, _dtw_py)
            run_cy = lambda: _fastdtw(a, b, radius, _dtw_cy)
        t_py, (cost_py, _) = _time(run_py, args.repeats)
        t_cy, (cost_cy, _) = _time(run_cy, args.repeats)
        if not np.isclose(cost_py, cost_cy, rtol=1e-12, atol=0.0):
            raise AssertionError(
                f"{name} T={length} d={channels}: kernels disagree "
                f"({cost_py!r} vs {cost_cy!r})"
            )
        rows.append((name, length, channels, t_py, t_cy, t_py / t_cy))

    header = f"{'case':<12} {'T':>6} {'d':>2} {'python':>10} {'compiled':>10} {'speedup':>8}"
    print(header)
    print("-" * len(header))
    for name, length, channels, t_py, t_cy, speedup in rows:
        print(
            f"{name:<12} {length:>6} {channels:>2} "
            f"{t_py * 1e3:>8.2f}ms {t_cy * 1e3:>8.2f}ms {speedup:>7.1f}x"
        )
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
