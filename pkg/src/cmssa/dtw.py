"""Multilevel approximate dynamic time warping with a banded kernel.

The exact quadratic table is computed only for short inputs; longer
series are halved recursively, the coarse warp path is projected back up
and widened by the radius, and the dynamic program runs inside that band
only. Setting the radius at or above the series length degenerates to
exact DTW.

The inner dynamic program comes from the compiled extension when it is
available, otherwise from the pure-Python twin. Set CMSSA_PURE_DTW=1
before import to force the fallback.
"""

from __future__ import annotations

import os

import numpy as np

from .errors import DataError, ParameterError, ShapeError

try:
    from . import _dtw_cy as _compiled
except ImportError:
    _compiled = None

from . import _dtw_py as _fallback

if _compiled is not None and not os.environ.get("CMSSA_PURE_DTW"):
    _kernel = _compiled
    KERNEL = "compiled"
else:
    _kernel = _fallback
    KERNEL = "python"


def kernel_name() -> str:
    """Which DP kernel was selected at import: 'compiled' or 'python'."""
    return KERNEL


def _as_features(x, name: str) -> np.ndarray:
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ShapeError(f"{name}: expected a nonempty (T, d) array, got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise DataError(f"{name}: non-finite values in DTW input")
    return np.ascontiguousarray(arr)


def _halve(x: np.ndarray) -> np.ndarray:
    # average adjacent sample pairs; an odd trailing sample is kept as is
    n = x.shape[0]
    if n % 2:
        return np.concatenate([(x[:n - 1:2] + x[1::2]) / 2.0, x[n - 1:]])
    return (x[::2] + x[1::2]) / 2.0


def _full_band(n: int, m: int):
    return np.zeros(n, dtype=np.intp), np.full(n, m - 1, dtype=np.intp)


def _expand_window(path: np.ndarray, n: int, m: int, radius: int):
    """Project a coarse warp path to the fine grid and widen it.

    Every coarse cell covers a 2x2 fine block; the extra margin of
    2*radius cells on each side matches widening by the radius at the
    coarse level. Returns per-row inclusive column bounds.
    """
    lo = np.full(n, m - 1, dtype=np.intp)
    hi = np.zeros(n, dtype=np.intp)
    margin = 2 * radius
    for idx in range(path.shape[0]):
        ci = int(path[idx, 0])
        cj = int(path[idx, 1])
        i0 = max(2 * ci - margin, 0)
        i1 = min(2 * ci + 1 + margin, n - 1)
        j0 = max(2 * cj - margin, 0)
        j1 = min(2 * cj + 1 + margin, m - 1)
        rows = slice(i0, i1 + 1)
        np.minimum(lo[rows], j0, out=lo[rows])
        np.maximum(hi[rows], j1, out=hi[rows])
    return lo, hi


def _fastdtw(a: np.ndarray, b: np.ndarray, radius: int, kernel):
    n = a.shape[0]
    m = b.shape[0]
    if n <= radius + 2 or m <= radius + 2:
        return kernel.dtw_banded(a, b, *_full_band(n, m))
    _, coarse_path = _fastdtw(_halve(a), _halve(b), radius, kernel)
    lo, hi = _expand_window(coarse_path, n, m, radius)
    return kernel.dtw_banded(a, b, lo, hi)


def _check_pair(a, b, radius) -> tuple[np.ndarray, np.ndarray, int]:
    a = _as_features(a, "first series")
    b = _as_features(b, "second series")
    if a.shape[1] != b.shape[1]:
        raise ShapeError(
            f"DTW operands have {a.shape[1]} and {b.shape[1]} channels"
        )
    radius = int(radius)
    if radius < 0:
        raise ParameterError(f"radius must be >= 0, got {radius}")
    return a, b, radius


def dtw_distance(a, b) -> float:
    """Exact DTW cost between two sequences (full table, Euclidean local cost)."""
    a, b, _ = _check_pair(a, b, 0)
    return _kernel.dtw_banded(a, b, *_full_band(a.shape[0], b.shape[0]))[0]


def fastdtw_distance(a, b, radius: int = 1) -> float:
    """Approximate DTW cost; approaches dtw_distance as the radius grows.

    With radius >= max(len(a), len(b)) the result equals the exact cost.
    """
    a, b, radius = _check_pair(a, b, radius)
    return _fastdtw(a, b, radius, _kernel)[0]
