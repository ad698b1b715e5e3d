"""Automatic selection of contrast strengths via eigenspace clustering.

Candidate alphas are a log-spaced grid plus 0. Each candidate yields an
eigenbasis of ``C_X - alpha * C_Y`` (both covariances computed once);
bases are compared through the nuclear norm of the product of their
eigenvector matrices, which ranges from 0 (orthogonal eigenspaces) to K
(identical eigenspaces). Spectral clustering of that affinity groups
candidates into regimes, and the selection keeps 0 plus the medoid of
every cluster that does not contain 0.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .cluster import spectral_partition
from .core import (
    CovarianceMatrix,
    EigenBasis,
    collection_covariance,
    contrast,
    top_eigenbasis,
)
from .errors import ParameterError, ShapeError
from .ingest import TimeSeries


def log_space(alpha_min: float, alpha_max: float, n: int) -> np.ndarray:
    """n log-spaced values from alpha_min to alpha_max, endpoints included."""
    if n < 2:
        raise ParameterError(f"log grid needs n >= 2 points, got {n}")
    if not 0 < alpha_min < alpha_max:
        raise ParameterError(
            f"need 0 < alpha_min < alpha_max, got ({alpha_min}, {alpha_max})"
        )
    return np.geomspace(alpha_min, alpha_max, n)


def eigenspace_affinity(
    first: EigenBasis | np.ndarray, second: EigenBasis | np.ndarray
) -> float:
    """Nuclear norm of E1.T @ E2; in [0, K] with K on identical eigenspaces.

    Accepts fitted bases or bare column-orthonormal matrices.
    """
    e1 = first.vectors if isinstance(first, EigenBasis) else np.asarray(first)
    e2 = second.vectors if isinstance(second, EigenBasis) else np.asarray(second)
    if e1.shape != e2.shape:
        raise ShapeError(
            f"cannot compare eigenbases of shapes {e1.shape} and {e2.shape}"
        )
    product = e1.T @ e2
    return float(np.linalg.svd(product, compute_uv=False).sum())


@dataclass(frozen=True)
class AlphaCandidateSet:
    """Candidate alphas (ascending, one zero), their bases, and affinities."""

    alphas: np.ndarray
    bases: tuple[EigenBasis, ...]
    affinity: np.ndarray

    def __post_init__(self):
        alphas = np.asarray(self.alphas, dtype=np.float64)
        n = alphas.size
        if np.count_nonzero(alphas == 0.0) != 1:
            raise ParameterError("candidate set must contain alpha=0 exactly once")
        if len(self.bases) != n or self.affinity.shape != (n, n):
            raise ShapeError(
                f"{len(self.bases)} bases / affinity {self.affinity.shape} "
                f"for {n} alphas"
            )
        object.__setattr__(self, "alphas", alphas)
        object.__setattr__(self, "bases", tuple(self.bases))


@dataclass(frozen=True)
class AlphaSelection:
    """Selected alphas (ascending, zero included) and the candidate clusters."""

    selected: tuple[float, ...]
    cluster_assignments: dict[float, int]

    def clusters(self) -> list[list[float]]:
        """Candidate alphas grouped by cluster index."""
        count = max(self.cluster_assignments.values()) + 1
        groups: list[list[float]] = [[] for _ in range(count)]
        for alpha in sorted(self.cluster_assignments):
            groups[self.cluster_assignments[alpha]].append(alpha)
        return groups


def build_candidates(
    cx: CovarianceMatrix,
    cy: CovarianceMatrix,
    k: int,
    window: int,
    channels: int,
    alpha_min: float = 1e-3,
    alpha_max: float = 1e3,
    n: int = 300,
) -> AlphaCandidateSet:
    """Fit one eigenbasis per candidate alpha and compute their affinities."""
    alphas = np.concatenate(([0.0], log_space(alpha_min, alpha_max, n)))
    bases = [
        top_eigenbasis(contrast(cx, cy, a), k, window=window, channels=channels, alpha=a)
        for a in alphas
    ]
    count = alphas.size
    affinity = np.empty((count, count))
    for i in range(count):
        for j in range(i, count):
            value = eigenspace_affinity(bases[i], bases[j])
            affinity[i, j] = value
            affinity[j, i] = value
    return AlphaCandidateSet(alphas=alphas, bases=tuple(bases), affinity=affinity)


def select(candidates: AlphaCandidateSet, m: int, seed: int = 0) -> AlphaSelection:
    """Cluster candidates into m regimes and keep 0 plus zero-free medoids.

    The medoid of a cluster maximizes total within-cluster affinity; ties
    break toward the lowest alpha.
    """
    count = candidates.alphas.size
    if not 1 <= m <= count:
        raise ParameterError(f"cluster count {m} outside [1, {count}]")
    labels = spectral_partition(candidates.affinity, m, seed)
    zero_index = int(np.nonzero(candidates.alphas == 0.0)[0][0])
    selected = [0.0]
    for group in range(m):
        members = np.nonzero(labels == group)[0]
        if members.size == 0 or zero_index in members:
            continue
        scores = candidates.affinity[np.ix_(members, members)].sum(axis=1)
        # members ascend in alpha, so argmax ties resolve to the lowest
        selected.append(float(candidates.alphas[members[np.argmax(scores)]]))
    assignments = {
        float(a): int(lab) for a, lab in zip(candidates.alphas, labels)
    }
    return AlphaSelection(selected=tuple(sorted(selected)), cluster_assignments=assignments)


def search(
    foreground: Sequence[TimeSeries],
    background: Sequence[TimeSeries],
    window: int,
    k: int,
    *,
    alpha_min: float = 1e-3,
    alpha_max: float = 1e3,
    n: int = 300,
    m: int = 5,
    seed: int = 0,
) -> AlphaSelection:
    """End-to-end alpha search on raw collections.

    Covariances of the stacked foreground and background trajectories are
    computed once and reused across all n + 1 candidates.
    """
    if m < 1 or n < m:
        raise ParameterError(f"need n >= m >= 1, got n={n}, m={m}")
    cx = collection_covariance(foreground, window)
    cy = collection_covariance(background, window)
    candidates = build_candidates(
        cx,
        cy,
        k,
        window=window,
        channels=foreground[0].channels,
        alpha_min=alpha_min,
        alpha_max=alpha_max,
        n=n,
    )
    return select(candidates, m, seed)
