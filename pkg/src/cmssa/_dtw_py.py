"""Pure-Python banded DTW kernel, the fallback for the compiled extension.

Both kernels share one contract: dtw_banded(a, b, lo, hi) runs the
dynamic program restricted to a per-row column band and returns the
accumulated cost plus one optimal warp path. Local cost is the Euclidean
distance between sample rows; a path step moves down, right, or
diagonally. The band must contain (0, 0) and (n-1, m-1) and be monotone
enough that some path exists.
"""

from __future__ import annotations

import numpy as np

INF = np.inf


def dtw_banded(a, b, lo, hi):
    """Windowed DTW over float64 (n, d) and (m, d) arrays.

    Returns (cost, path) where path is an (L, 2) intp array of matrix
    cells from (0, 0) to (n-1, m-1). Ties during backtracking prefer the
    diagonal step, then the vertical one.
    """
    n = a.shape[0]
    m = b.shape[0]
    starts = np.zeros(n + 1, dtype=np.intp)
    np.cumsum(hi - lo + 1, out=starts[1:])
    acc = np.empty(starts[n])

    for i in range(n):
        row_lo = int(lo[i])
        row_hi = int(hi[i])
        base = int(starts[i])
        local = np.sqrt(((b[row_lo:row_hi + 1] - a[i]) ** 2).sum(axis=1))
        if i > 0:
            prev_lo = int(lo[i - 1])
            prev_hi = int(hi[i - 1])
            prev_base = int(starts[i - 1])
        for j in range(row_lo, row_hi + 1):
            if i == 0:
                if j == 0:
                    acc[base] = local[0]
                else:
                    acc[base + j - row_lo] = local[j - row_lo] + acc[base + j - 1 - row_lo]
                continue
            best = INF
            if prev_lo <= j - 1 <= prev_hi:
                best = acc[prev_base + (j - 1 - prev_lo)]
            if prev_lo <= j <= prev_hi:
                v = acc[prev_base + (j - prev_lo)]
                if v < best:
                    best = v
            if j - 1 >= row_lo:
                v = acc[base + (j - 1 - row_lo)]
                if v < best:
                    best = v
            acc[base + (j - row_lo)] = local[j - row_lo] + best

    def cell(i, j):
        if i < 0 or j < 0 or j < lo[i] or j > hi[i]:
            return INF
        return acc[starts[i] + (j - lo[i])]

    i, j = n - 1, m - 1
    path = [(i, j)]
    while i > 0 or j > 0:
        diag = cell(i - 1, j - 1)
        up = cell(i - 1, j)
        left = cell(i, j - 1)
        if diag <= up and diag <= left:
            i -= 1
            j -= 1
        elif up <= left:
            i -= 1
        else:
            j -= 1
        path.append((i, j))
    path.reverse()
    cost = acc[starts[n - 1] + (m - 1 - lo[n - 1])]
    return float(cost), np.array(path, dtype=np.intp)
