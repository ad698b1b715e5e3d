"""Loading, validation, centering, and splitting of multichannel time series.

The on-disk layout is one CSV per collection with header
``series_id,label,ch1,...,chD``. Rows belonging to one series must be
contiguous; the label column may be empty. The delimiter defaults to a
comma and can be overridden per call or through the ``CMSSA_DELIMITER``
environment variable.
"""

from __future__ import annotations

import csv
import os
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DataError, ParameterError, ParseError, SchemaError, ShapeError

DELIMITER_ENV = "CMSSA_DELIMITER"


def _as_matrix(values, series_id: str) -> np.ndarray:
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    if arr.ndim != 2:
        raise ShapeError(
            f"series '{series_id}': expected a (T, D) matrix, got ndim={arr.ndim}"
        )
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ShapeError(f"series '{series_id}': empty value matrix {arr.shape}")
    if not np.all(np.isfinite(arr)):
        row = int(np.argwhere(~np.isfinite(arr))[0, 0])
        raise DataError(f"series '{series_id}' has a non-finite value at row {row}")
    return arr


@dataclass(frozen=True)
class TimeSeries:
    """A (T, D) block of aligned channels, treated as immutable once built."""

    values: np.ndarray
    series_id: str
    label: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "values", _as_matrix(self.values, self.series_id))

    @property
    def length(self) -> int:
        return self.values.shape[0]

    @property
    def channels(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class CenteredSeries:
    """A channel-centered series together with the means that were removed."""

    values: np.ndarray
    channel_means: np.ndarray
    series_id: str
    label: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "values", _as_matrix(self.values, self.series_id))
        means = np.asarray(self.channel_means, dtype=np.float64).reshape(-1)
        if means.shape[0] != self.values.shape[1]:
            raise ShapeError(
                f"series '{self.series_id}': {means.shape[0]} channel means "
                f"for {self.values.shape[1]} channels"
            )
        object.__setattr__(self, "channel_means", means)

    @property
    def length(self) -> int:
        return self.values.shape[0]

    @property
    def channels(self) -> int:
        return self.values.shape[1]


def center(series: TimeSeries) -> CenteredSeries:
    """Subtract the per-channel mean, recording the removed offsets."""
    means = series.values.mean(axis=0)
    return CenteredSeries(
        values=series.values - means,
        channel_means=means,
        series_id=series.series_id,
        label=series.label,
    )


def split_halves(series: TimeSeries) -> tuple[TimeSeries, TimeSeries]:
    """Split a series into first/second halves; the first gets ceil(T/2) rows.

    Series ids are suffixed with ``_1`` and ``_2``; the label is preserved.
    """
    if series.length < 2:
        raise ParameterError(
            f"series '{series.series_id}' has length {series.length}; "
            "need at least 2 rows to split"
        )
    cut = (series.length + 1) // 2
    first = TimeSeries(series.values[:cut], f"{series.series_id}_1", series.label)
    second = TimeSeries(series.values[cut:], f"{series.series_id}_2", series.label)
    return first, second


def _delimiter(explicit: str | None) -> str:
    if explicit is not None:
        return explicit
    return os.environ.get(DELIMITER_ENV, ",")


def load_collection(path, delimiter: str | None = None) -> list[TimeSeries]:
    """Read every series from a collection CSV, in file order.

    Raises ParseError or SchemaError with the offending line number on
    malformed input, and DataError on non-finite values.
    """
    delim = _delimiter(delimiter)
    try:
        handle = open(path, "r", newline="")
    except OSError as exc:
        raise DataError(f"cannot read input file '{path}': {exc}") from exc

    order: list[str] = []
    rows: dict[str, list[list[float]]] = {}
    labels: dict[str, str] = {}
    with handle:
        reader = csv.reader(handle, delimiter=delim)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"'{path}': empty file, expected a header row")
        if len(header) < 3 or header[0] != "series_id" or header[1] != "label":
            raise SchemaError(
                f"'{path}': header must be series_id,label,ch1,... got {header}"
            )
        width = len(header)
        current = None
        for row in reader:
            line = reader.line_num
            if len(row) != width:
                raise ParseError(
                    f"'{path}' line {line}: expected {width} fields, got {len(row)}"
                )
            sid = row[0]
            if sid != current:
                if sid in rows:
                    raise SchemaError(
                        f"'{path}' line {line}: rows for series '{sid}' are not "
                        "contiguous"
                    )
                current = sid
                order.append(sid)
                rows[sid] = []
                labels[sid] = row[1]
            elif row[1] != labels[sid]:
                raise SchemaError(
                    f"'{path}' line {line}: conflicting labels for series '{sid}'"
                )
            try:
                rows[sid].append([float(v) for v in row[2:]])
            except ValueError as exc:
                raise ParseError(f"'{path}' line {line}: {exc}") from exc

    return [
        TimeSeries(rows[sid], sid, labels[sid] if labels[sid] != "" else None)
        for sid in order
    ]


def save_collection(path, series: Sequence[TimeSeries], delimiter: str | None = None):
    """Write series to the collection CSV layout (inverse of load_collection)."""
    if not series:
        raise ParameterError("cannot save an empty collection")
    channels = series[0].channels
    for s in series:
        if s.channels != channels:
            raise ShapeError(
                f"series '{s.series_id}' has {s.channels} channels, "
                f"expected {channels}"
            )
    delim = _delimiter(delimiter)
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle, delimiter=delim)
        writer.writerow(["series_id", "label"] + [f"ch{j + 1}" for j in range(channels)])
        for s in series:
            label = s.label if s.label is not None else ""
            for row in s.values:
                writer.writerow([s.series_id, label] + [repr(float(v)) for v in row])
