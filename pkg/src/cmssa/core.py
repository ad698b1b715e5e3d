"""Trajectory embedding, contrastive covariance, and component transforms.

A series of length T with D channels is embedded as a trajectory matrix
of shape (T - W + 1, D * W): one Hankel block of lagged copies per
channel, blocks concatenated left to right in channel order. Covariances
of foreground and background trajectories are contrasted as
``C_X - alpha * C_Y`` and the top eigenvectors of that (possibly
indefinite) matrix form the model. Series are then mapped either to
principal components (PC transform) or to per-component reconstructions
in the original sample space (RC transform, by diagonal averaging).
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import (
    DataError,
    InsufficientDataError,
    NumericError,
    ParameterError,
    ParseError,
    ShapeError,
)
from .ingest import CenteredSeries, TimeSeries, center

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TrajectoryMatrix:
    """Lag-embedded series: (T - W + 1, D * W), channel blocks side by side.

    ``source_length`` is the originating series length T, or None when the
    matrix was stacked from several series.
    """

    values: np.ndarray
    window: int
    channels: int
    source_length: int | None = None

    def __post_init__(self):
        arr = np.asarray(self.values, dtype=np.float64)
        if arr.ndim != 2 or arr.shape[1] != self.window * self.channels:
            raise ShapeError(
                f"trajectory matrix shape {arr.shape} does not match "
                f"window={self.window}, channels={self.channels}"
            )
        object.__setattr__(self, "values", arr)


@dataclass(frozen=True)
class CovarianceMatrix:
    """Symmetric (D*W, D*W) covariance of trajectory columns."""

    values: np.ndarray
    row_count: int

    def __post_init__(self):
        arr = np.asarray(self.values, dtype=np.float64)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise ShapeError(f"covariance must be square, got {arr.shape}")
        scale = np.abs(arr).max() if arr.size else 0.0
        if not np.allclose(arr, arr.T, rtol=0.0, atol=1e-12 * max(scale, 1.0)):
            raise ShapeError("covariance matrix is not symmetric")
        object.__setattr__(self, "values", arr)

    @property
    def dim(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True)
class EigenBasis:
    """Top-K eigenvectors (columns) of a contrastive covariance.

    Eigenvalues are sorted by descending algebraic value (the contrast
    matrix may be indefinite, so negative values are legal). Each column
    is sign-canonicalized: its largest-magnitude entry is positive.
    """

    vectors: np.ndarray
    eigenvalues: np.ndarray
    window: int
    channels: int
    alpha: float

    def __post_init__(self):
        vecs = np.asarray(self.vectors, dtype=np.float64)
        vals = np.asarray(self.eigenvalues, dtype=np.float64).reshape(-1)
        if self.window < 1 or self.channels < 1:
            raise ParameterError(
                f"window={self.window}, channels={self.channels} must be >= 1"
            )
        if self.alpha < 0:
            raise ParameterError(f"alpha must be >= 0, got {self.alpha}")
        dw = self.window * self.channels
        if vecs.ndim != 2 or vecs.shape[0] != dw:
            raise ShapeError(
                f"eigenvector matrix shape {vecs.shape} does not match "
                f"window*channels={dw}"
            )
        k = vecs.shape[1]
        if not 1 <= k <= dw:
            raise ParameterError(f"component count {k} outside [1, {dw}]")
        if vals.shape[0] != k:
            raise ShapeError(f"{vals.shape[0]} eigenvalues for {k} eigenvectors")
        gram = vecs.T @ vecs
        if np.abs(gram - np.eye(k)).max() > 1e-10:
            raise ParameterError("eigenvector columns are not orthonormal")
        if np.any(vals[:-1] < vals[1:]):
            raise ParameterError("eigenvalues must be sorted descending")
        peaks = vecs[np.argmax(np.abs(vecs), axis=0), np.arange(k)]
        if np.any(peaks < 0):
            raise ParameterError(
                "eigenvector signs are not canonical "
                "(largest-magnitude entry must be positive)"
            )
        object.__setattr__(self, "vectors", vecs)
        object.__setattr__(self, "eigenvalues", vals)

    @property
    def k(self) -> int:
        return self.vectors.shape[1]


@dataclass(frozen=True)
class Decomposition:
    """PC and RC transforms of one series under a fitted basis.

    ``pcs`` has shape (T - W + 1, K). ``rcs`` has shape (T, D * K): one
    block of D channel columns per component, blocks in component order.
    """

    pcs: np.ndarray
    rcs: np.ndarray
    basis: EigenBasis

    def component(self, k: int) -> np.ndarray:
        """The (T, D) reconstruction of component k."""
        d = self.basis.channels
        return self.rcs[:, k * d:(k + 1) * d]

    def summed_rcs(self, channel_means: np.ndarray | None = None) -> np.ndarray:
        """Sum of all component reconstructions, shape (T, D).

        Reconstructions are centered; pass channel_means to re-add the
        offsets removed during centering (display convenience).
        """
        t = self.rcs.shape[0]
        total = self.rcs.reshape(t, self.basis.k, self.basis.channels).sum(axis=1)
        if channel_means is not None:
            total = total + np.asarray(channel_means, dtype=np.float64)
        return total


def hankelize(series: CenteredSeries, window: int) -> TrajectoryMatrix:
    """Embed a centered series into its trajectory matrix.

    Entry (r, j*W + c) equals ``series.values[r + c, j]`` (0-based), so each
    channel contributes one Hankel block of W lagged columns.
    """
    if window < 1:
        raise ParameterError(f"window must be >= 1, got {window}")
    t, d = series.values.shape
    if window > t:
        raise ParameterError(
            f"window {window} exceeds length {t} of series '{series.series_id}'"
        )
    view = sliding_window_view(series.values, window, axis=0)  # (T', D, W)
    values = view.reshape(t - window + 1, d * window).copy()
    return TrajectoryMatrix(values, window=window, channels=d, source_length=t)


def stack(trajectories: Sequence[TrajectoryMatrix]) -> TrajectoryMatrix:
    """Vertically stack trajectory matrices of several series.

    All inputs must share the same window and channel count. A single
    input is returned (values unchanged) with source_length cleared.
    """
    if not trajectories:
        raise ParameterError("cannot stack an empty list of trajectory matrices")
    window = trajectories[0].window
    channels = trajectories[0].channels
    for tm in trajectories:
        if tm.window != window or tm.channels != channels:
            raise ShapeError(
                f"cannot stack trajectories with (window, channels)="
                f"({tm.window}, {tm.channels}) and ({window}, {channels})"
            )
    values = np.vstack([tm.values for tm in trajectories])
    return TrajectoryMatrix(values, window=window, channels=channels)


def covariance(trajectory: TrajectoryMatrix) -> CovarianceMatrix:
    """Column covariance of a trajectory matrix.

    Column means are subtracted, then ``H.T @ H / (rows - 1)``. The result
    is symmetrized exactly to absorb BLAS rounding.
    """
    h = trajectory.values
    rows = h.shape[0]
    if rows < 2:
        raise InsufficientDataError(
            f"covariance needs at least 2 trajectory rows, got {rows}"
        )
    centered = h - h.mean(axis=0)
    raw = centered.T @ centered / (rows - 1)
    return CovarianceMatrix((raw + raw.T) / 2.0, row_count=rows)


def contrast(
    cx: CovarianceMatrix, cy: CovarianceMatrix, alpha: float
) -> CovarianceMatrix:
    """Contrastive covariance ``C_X - alpha * C_Y`` (alpha >= 0).

    alpha == 0 returns cx itself, so the contrastive path reduces exactly
    (bitwise) to the plain covariance path.
    """
    if alpha < 0:
        raise ParameterError(f"alpha must be >= 0, got {alpha}")
    if alpha == 0:
        return cx
    if cx.dim != cy.dim:
        raise ShapeError(
            f"covariance dimensions differ: {cx.dim} vs {cy.dim}"
        )
    return CovarianceMatrix(cx.values - alpha * cy.values, row_count=cx.row_count)


def canonical_signs(vectors: np.ndarray) -> np.ndarray:
    """Flip each column so its largest-magnitude entry is positive."""
    vecs = np.asarray(vectors, dtype=np.float64)
    peaks = vecs[np.argmax(np.abs(vecs), axis=0), np.arange(vecs.shape[1])]
    return vecs * np.where(peaks < 0, -1.0, 1.0)


def top_eigenbasis(
    cov: CovarianceMatrix, k: int, window: int, channels: int, alpha: float = 0.0
) -> EigenBasis:
    """Eigenvectors of the k largest algebraic eigenvalues of a symmetric matrix."""
    dw = window * channels
    if cov.dim != dw:
        raise ShapeError(
            f"covariance dimension {cov.dim} does not match "
            f"window*channels={dw}"
        )
    if not 1 <= k <= dw:
        raise ParameterError(f"component count {k} outside [1, {dw}]")
    try:
        vals, vecs = np.linalg.eigh(cov.values)
    except np.linalg.LinAlgError as exc:
        raise NumericError(f"eigendecomposition failed: {exc}") from exc
    order = slice(dw - 1, dw - 1 - k, -1) if k < dw else slice(None, None, -1)
    top_vals = np.ascontiguousarray(vals[order])
    top_vecs = canonical_signs(vecs[:, order])
    return EigenBasis(
        vectors=top_vecs,
        eigenvalues=top_vals,
        window=window,
        channels=channels,
        alpha=alpha,
    )


def _check_series_for_basis(series: CenteredSeries, basis: EigenBasis):
    if series.channels != basis.channels:
        raise ShapeError(
            f"series '{series.series_id}' has {series.channels} channels, "
            f"model expects {basis.channels}"
        )
    if series.length < basis.window:
        raise ParameterError(
            f"window {basis.window} exceeds length {series.length} of "
            f"series '{series.series_id}'"
        )


def project(series: CenteredSeries, basis: EigenBasis) -> np.ndarray:
    """PC transform: trajectory matrix times eigenvectors, shape (T - W + 1, K)."""
    _check_series_for_basis(series, basis)
    return hankelize(series, basis.window).values @ basis.vectors


def reconstruct(series: CenteredSeries, basis: EigenBasis) -> Decomposition:
    """PC and RC transforms of one series.

    Component k, channel j at time t is the average of
    ``A[t - c, k] * E[j*W + c, k]`` over all lags c for which the
    trajectory row index t - c is valid; this is diagonal averaging of
    the rank-one trajectory reconstruction, computed here as a
    convolution divided by the anti-diagonal cell count.
    """
    _check_series_for_basis(series, basis)
    w, d, k = basis.window, basis.channels, basis.k
    t = series.length
    pcs = hankelize(series, w).values @ basis.vectors
    counts = np.convolve(np.ones(t - w + 1), np.ones(w))  # exact small integers
    rcs = np.empty((t, d * k))
    for comp in range(k):
        for j in range(d):
            block = basis.vectors[j * w:(j + 1) * w, comp]
            rcs[:, comp * d + j] = np.convolve(pcs[:, comp], block) / counts
    return Decomposition(pcs=pcs, rcs=rcs, basis=basis)


def collection_covariance(
    collection: Sequence[TimeSeries], window: int
) -> CovarianceMatrix:
    """Center each series, embed, stack, and take the column covariance."""
    if not collection:
        raise ParameterError("cannot fit on an empty collection")
    stacked = stack([hankelize(center(s), window) for s in collection])
    return covariance(stacked)


def fit_basis(
    foreground: Sequence[TimeSeries],
    background: Sequence[TimeSeries] | None,
    window: int,
    k: int,
    alpha: float = 0.0,
) -> EigenBasis:
    """Fit an eigenbasis on foreground (and optionally background) series.

    With alpha == 0 or no background this is a plain covariance fit; with
    alpha > 0 a background collection is required and the basis comes
    from the contrastive covariance.
    """
    cx = collection_covariance(foreground, window)
    if alpha > 0:
        if not background:
            raise ParameterError("alpha > 0 requires a background collection")
        cy = collection_covariance(background, window)
        cov = contrast(cx, cy, alpha)
    else:
        cov = cx
    channels = foreground[0].channels
    basis = top_eigenbasis(cov, k, window=window, channels=channels, alpha=alpha)
    logger.info(
        "fitted basis window=%d channels=%d k=%d alpha=%g eigenvalues=%s",
        window, channels, k, alpha, np.array2string(basis.eigenvalues, precision=4),
    )
    return basis


def basis_to_dict(basis: EigenBasis) -> dict:
    """JSON-ready mapping; vectors are flattened row-major."""
    return {
        "window": basis.window,
        "channels": basis.channels,
        "alpha": basis.alpha,
        "eigenvalues": [float(v) for v in basis.eigenvalues],
        "vectors": [float(v) for v in basis.vectors.ravel()],
    }


def basis_from_dict(payload: dict) -> EigenBasis:
    try:
        window = int(payload["window"])
        channels = int(payload["channels"])
        alpha = float(payload["alpha"])
        vals = np.asarray(payload["eigenvalues"], dtype=np.float64)
        flat = np.asarray(payload["vectors"], dtype=np.float64)
    except (KeyError, TypeError, ValueError) as exc:
        raise ShapeError(f"malformed model payload: {exc}") from exc
    dw = window * channels
    if vals.size == 0 or flat.size != dw * vals.size:
        raise ShapeError(
            f"model payload has {flat.size} vector entries for "
            f"window*channels={dw} and {vals.size} eigenvalues"
        )
    vectors = flat.reshape(dw, vals.size)
    return EigenBasis(
        vectors=vectors,
        eigenvalues=vals,
        window=window,
        channels=channels,
        alpha=alpha,
    )


def save_basis(path, basis: EigenBasis):
    with open(path, "w") as handle:
        json.dump(basis_to_dict(basis), handle)
        handle.write("\n")


def load_basis(path) -> EigenBasis:
    try:
        with open(path, "r") as handle:
            payload = json.load(handle)
    except OSError as exc:
        raise DataError(f"cannot read model file '{path}': {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ParseError(f"model file '{path}' is not valid JSON: {exc}") from exc
    return basis_from_dict(payload)
