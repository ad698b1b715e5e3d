"""Pairwise DTW similarity and spectral clustering of decomposed series.

Similarity between two series is ``1 / (cost + 1)`` where cost is the
smaller of the two FastDTW evaluations with swapped operands, making the
matrix symmetric by construction with entries in (0, 1] and a unit
diagonal. Clustering embeds the similarity matrix via the symmetrically
normalized Laplacian, row-normalizes the top eigenvectors, and runs
k-means++ with a fixed seed.
"""

from __future__ import annotations

import csv
import hashlib
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .dtw import fastdtw_distance
from .errors import NumericError, ParameterError, ParseError, SchemaError, ShapeError

#: retries with shifted seeds before clustering degeneracy becomes an error
DEGENERACY_RETRIES = 3


@dataclass(frozen=True)
class SimilarityMatrix:
    """Symmetric (N, N) similarity with entries in (0, 1] and unit diagonal."""

    values: np.ndarray
    ids: tuple[str, ...]

    def __post_init__(self):
        arr = np.asarray(self.values, dtype=np.float64)
        ids = tuple(self.ids)
        n = len(ids)
        if arr.shape != (n, n):
            raise ShapeError(f"similarity shape {arr.shape} for {n} ids")
        if not np.allclose(arr, arr.T, rtol=0.0, atol=1e-12):
            raise ShapeError("similarity matrix is not symmetric")
        if np.any(arr <= 0.0) or np.any(arr > 1.0):
            raise ShapeError("similarity entries must lie in (0, 1]")
        if np.any(np.diag(arr) != 1.0):
            raise ShapeError("similarity diagonal must be exactly 1")
        object.__setattr__(self, "values", arr)
        object.__setattr__(self, "ids", ids)


@dataclass(frozen=True)
class ClusterAssignment:
    """Cluster index per series id."""

    assignments: Mapping[str, int]
    k: int

    def __post_init__(self):
        object.__setattr__(self, "assignments", dict(self.assignments))


def similarity(a, b, radius: int = 1) -> float:
    """DTW-based similarity in (0, 1]; symmetric in its operands."""
    cost = min(fastdtw_distance(a, b, radius), fastdtw_distance(b, a, radius))
    return 1.0 / (cost + 1.0)


def similarity_matrix(
    features: Sequence[np.ndarray],
    ids: Sequence[str],
    radius: int = 1,
    jobs: int = 1,
) -> SimilarityMatrix:
    """All-pairs similarity over per-series feature arrays.

    Each feature array is a (T_i, d) matrix; lengths may differ, channel
    counts must match. Pairs are independent, so jobs > 1 computes them
    in a thread pool (the compiled kernel releases the GIL).
    """
    n = len(features)
    if n != len(ids):
        raise ShapeError(f"{n} feature arrays for {len(ids)} ids")
    if n == 0:
        raise ParameterError("similarity matrix needs at least one series")
    if len(set(ids)) != n:
        raise SchemaError("series ids must be unique")
    values = np.eye(n)
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]

    def one(pair):
        i, j = pair
        return i, j, similarity(features[i], features[j], radius)

    if jobs > 1 and len(pairs) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(one, pairs))
    else:
        results = [one(p) for p in pairs]
    for i, j, s in results:
        values[i, j] = s
        values[j, i] = s
    return SimilarityMatrix(values, tuple(ids))


def spectral_partition(affinity: np.ndarray, k: int, seed: int) -> np.ndarray:
    """Cluster rows of a symmetric positive affinity matrix into k groups.

    Symmetrically normalized Laplacian embedding: the top-k eigenvectors
    of D^{-1/2} S D^{-1/2} are row-normalized and fed to k-means++ with
    the given seed. A clustering that comes back with an empty group is
    retried with shifted seeds before raising NumericError.
    """
    from sklearn.cluster import KMeans  # deferred: heavy import

    s = np.asarray(affinity, dtype=np.float64)
    n = s.shape[0]
    if s.shape != (n, n):
        raise ShapeError(f"affinity must be square, got {s.shape}")
    if not 1 <= k <= n:
        raise ParameterError(f"cluster count {k} outside [1, {n}]")
    deg = s.sum(axis=1)
    if np.any(deg <= 0):
        raise NumericError("affinity matrix has a row with nonpositive degree")
    inv_root = 1.0 / np.sqrt(deg)
    normalized = s * inv_root[:, None] * inv_root[None, :]
    _, vecs = np.linalg.eigh((normalized + normalized.T) / 2.0)
    embedding = vecs[:, n - k:]
    norms = np.linalg.norm(embedding, axis=1)
    embedding = embedding / np.maximum(norms, 1e-300)[:, None]

    for attempt in range(DEGENERACY_RETRIES + 1):
        km = KMeans(
            n_clusters=k,
            init="k-means++",
            n_init=10,
            random_state=seed + attempt,
        )
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            labels = km.fit_predict(embedding)
        if np.unique(labels).size == k:
            return labels.astype(np.intp)
    raise NumericError(
        f"spectral clustering produced an empty group in all "
        f"{DEGENERACY_RETRIES + 1} attempts (k={k}, n={n})"
    )


def spectral_cluster(matrix: SimilarityMatrix, k: int, seed: int = 0) -> ClusterAssignment:
    """Partition the series behind a similarity matrix into k clusters."""
    labels = spectral_partition(matrix.values, k, seed)
    return ClusterAssignment(
        {sid: int(lab) for sid, lab in zip(matrix.ids, labels)}, k
    )


def feature_cache_key(features: Sequence[np.ndarray], radius: int) -> str:
    """Stable digest of the feature arrays and radius, for disk caching."""
    digest = hashlib.sha256()
    digest.update(f"radius={radius}".encode())
    for arr in features:
        a = np.ascontiguousarray(arr, dtype=np.float64)
        digest.update(f"|{a.shape[0]}x{a.shape[1]}|".encode())
        digest.update(a.tobytes())
    return digest.hexdigest()[:16]


def save_similarity_csv(path, matrix: SimilarityMatrix, delimiter: str = ","):
    """Write a similarity matrix with its id header row."""
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle, delimiter=delimiter)
        writer.writerow(["series_id"] + list(matrix.ids))
        for sid, row in zip(matrix.ids, matrix.values):
            writer.writerow([sid] + [repr(float(v)) for v in row])


def load_similarity_csv(path, delimiter: str = ",") -> SimilarityMatrix:
    try:
        handle = open(path, "r", newline="")
    except OSError as exc:
        raise ParseError(f"cannot read similarity file '{path}': {exc}") from exc
    with handle:
        reader = csv.reader(handle, delimiter=delimiter)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError(f"'{path}': empty similarity file")
        if len(header) < 2 or header[0] != "series_id":
            raise SchemaError(f"'{path}': bad similarity header {header[:3]}")
        ids = tuple(header[1:])
        rows = []
        row_ids = []
        for row in reader:
            if len(row) != len(ids) + 1:
                raise ParseError(
                    f"'{path}' line {reader.line_num}: expected "
                    f"{len(ids) + 1} fields, got {len(row)}"
                )
            row_ids.append(row[0])
            try:
                rows.append([float(v) for v in row[1:]])
            except ValueError as exc:
                raise ParseError(f"'{path}' line {reader.line_num}: {exc}") from exc
    if tuple(row_ids) != ids:
        raise SchemaError(f"'{path}': row ids do not match header ids")
    return SimilarityMatrix(np.asarray(rows), ids)


def cached_similarity_matrix(
    features: Sequence[np.ndarray],
    ids: Sequence[str],
    radius: int,
    cache_dir=None,
    jobs: int = 1,
) -> SimilarityMatrix:
    """similarity_matrix with an optional on-disk CSV cache.

    The cache key covers the feature arrays and the radius, so any change
    to the transform invalidates the entry.
    """
    if cache_dir is None:
        return similarity_matrix(features, ids, radius=radius, jobs=jobs)
    cache = Path(cache_dir)
    cache.mkdir(parents=True, exist_ok=True)
    path = cache / f"sim_{feature_cache_key(features, radius)}.csv"
    if path.exists():
        matrix = load_similarity_csv(path)
        if matrix.ids == tuple(ids):
            return matrix
    matrix = similarity_matrix(features, ids, radius=radius, jobs=jobs)
    save_similarity_csv(path, matrix)
    return matrix
