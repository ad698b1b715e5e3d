"""Grid sweep over window, component count, alpha, and transform.

Each grid cell fits a basis, transforms the foreground series, clusters
them by DTW similarity, and scores the clustering against the gold
labels. Results append to one CSV row per cell; rerunning with an
existing results file skips rows already present, so interrupted sweeps
resume cleanly. A companion ``*_paired.csv`` compares, per (window,
components, transform), the plain fit against the best contrastive one.
"""

from __future__ import annotations

import csv
import logging
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import alpha_search
from .cluster import cached_similarity_matrix, spectral_cluster
from .core import contrast, collection_covariance, project, reconstruct, top_eigenbasis
from .errors import CmssaError, ParameterError
from .evaluate import bcubed
from .ingest import center, load_collection

logger = logging.getLogger(__name__)

FIELDS = [
    "window",
    "components",
    "alpha",
    "transform",
    "precision",
    "recall",
    "f1",
    "n_series",
    "status",
]

DEFAULT_WINDOWS = (8, 16, 32, 64, 128)
DEFAULT_COMPONENTS = (1, 2, 4, 6, 8, 10, 12, 14, 16, 18, 20)


@dataclass(frozen=True)
class SweepConfig:
    foreground: str
    background: str
    out: str
    windows: tuple[int, ...] = DEFAULT_WINDOWS
    components: tuple[int, ...] = DEFAULT_COMPONENTS
    transforms: tuple[str, ...] = ("pc", "rc")
    alphas: tuple[float, ...] | None = None  # None: run the alpha search per cell
    alpha_min: float = 1e-3
    alpha_max: float = 1e3
    alpha_n: int = 300
    alpha_m: int = 5
    clusters: int = 4
    radius: int = 1
    seed: int = 0
    jobs: int = 1
    model_free: bool = False
    cache_dir: str | None = None

    def __post_init__(self):
        for name in ("windows", "components", "transforms"):
            object.__setattr__(self, name, tuple(getattr(self, name)))
        if self.alphas is not None:
            object.__setattr__(
                self, "alphas", tuple(float(a) for a in self.alphas)
            )
            if any(a < 0 for a in self.alphas):
                raise ParameterError("alphas must all be >= 0")
        for t in self.transforms:
            if t not in ("pc", "rc"):
                raise ParameterError(f"unknown transform '{t}' (expected pc or rc)")


def _alpha_str(alpha) -> str:
    return repr(float(alpha))


def _existing_keys(path: Path) -> set[tuple[str, str, str, str]]:
    if not path.exists():
        return set()
    with open(path, "r", newline="") as handle:
        reader = csv.DictReader(handle)
        return {
            (row["window"], row["components"], row["alpha"], row["transform"])
            for row in reader
        }


class _Writer:
    """Serialized append-only CSV writer shared by worker threads."""

    def __init__(self, path: Path):
        self.path = path
        self.lock = threading.Lock()
        if not path.exists():
            with open(path, "w", newline="") as handle:
                csv.DictWriter(handle, FIELDS).writeheader()

    def write(self, row: dict):
        with self.lock:
            with open(self.path, "a", newline="") as handle:
                csv.DictWriter(handle, FIELDS).writerow(row)


def _features(series, basis, transform: str) -> np.ndarray:
    if transform == "pc":
        return project(series, basis)
    return reconstruct(series, basis).rcs


def run_sweep(config: SweepConfig) -> list[dict]:
    """Execute the sweep; returns the rows computed in this invocation."""
    foreground = load_collection(config.foreground)
    background = load_collection(config.background)
    gold = {s.series_id: s.label for s in foreground}
    centered = [center(s) for s in foreground]
    ids = [s.series_id for s in foreground]
    channels = foreground[0].channels

    out_path = Path(config.out)
    done = _existing_keys(out_path)
    writer = _Writer(out_path)

    # plan cells, computing covariances and alpha grids up front
    covariances: dict[int, tuple] = {}
    cells: list[tuple[int, int, float, str]] = []
    for window in config.windows:
        dim = window * channels
        valid_ks = [k for k in config.components if k <= dim]
        for k in config.components:
            if k > dim:
                logger.info(
                    "skipping components=%d at window=%d: exceeds %d", k, window, dim
                )
        if not valid_ks:
            continue
        covariances[window] = (
            collection_covariance(foreground, window),
            collection_covariance(background, window),
        )
        cx, cy = covariances[window]
        for k in valid_ks:
            if config.alphas is not None:
                alphas = config.alphas
            else:
                candidates = alpha_search.build_candidates(
                    cx,
                    cy,
                    k,
                    window=window,
                    channels=channels,
                    alpha_min=config.alpha_min,
                    alpha_max=config.alpha_max,
                    n=config.alpha_n,
                )
                alphas = alpha_search.select(
                    candidates, config.alpha_m, config.seed
                ).selected
            for alpha in alphas:
                for transform in config.transforms:
                    cells.append((window, k, float(alpha), transform))

    def run_cell(cell) -> dict | None:
        window, k, alpha, transform = cell
        key = (str(window), str(k), _alpha_str(alpha), transform)
        if key in done:
            return None
        row = {
            "window": window,
            "components": k,
            "alpha": _alpha_str(alpha),
            "transform": transform,
            "precision": "",
            "recall": "",
            "f1": "",
            "n_series": len(ids),
            "status": "ok",
        }
        try:
            cx, cy = covariances[window]
            basis = top_eigenbasis(
                contrast(cx, cy, alpha), k, window=window, channels=channels, alpha=alpha
            )
            feats = [_features(s, basis, transform) for s in centered]
            matrix = cached_similarity_matrix(
                feats, ids, config.radius, cache_dir=config.cache_dir
            )
            assignment = spectral_cluster(matrix, config.clusters, config.seed)
            report = bcubed(
                assignment,
                gold,
                config={"window": window, "k": k, "alpha": alpha, "transform": transform},
            )
            row["precision"] = repr(report.precision)
            row["recall"] = repr(report.recall)
            row["f1"] = repr(report.f1)
        except CmssaError as exc:
            row["status"] = f"error: {exc}"
            logger.warning("cell %s failed: %s", cell, exc)
        writer.write(row)
        return row

    def run_model_free() -> dict | None:
        key = ("", "", "", "none")
        if key in done:
            return None
        row = {
            "window": "",
            "components": "",
            "alpha": "",
            "transform": "none",
            "precision": "",
            "recall": "",
            "f1": "",
            "n_series": len(ids),
            "status": "ok",
        }
        try:
            feats = [s.values for s in foreground]
            matrix = cached_similarity_matrix(
                feats, ids, config.radius, cache_dir=config.cache_dir
            )
            assignment = spectral_cluster(matrix, config.clusters, config.seed)
            report = bcubed(assignment, gold, config={"transform": "none"})
            row["precision"] = repr(report.precision)
            row["recall"] = repr(report.recall)
            row["f1"] = repr(report.f1)
        except CmssaError as exc:
            row["status"] = f"error: {exc}"
            logger.warning("model-free baseline failed: %s", exc)
        writer.write(row)
        return row

    written: list[dict] = []
    if config.jobs > 1:
        with ThreadPoolExecutor(max_workers=config.jobs) as pool:
            for row in pool.map(run_cell, cells):
                if row is not None:
                    written.append(row)
    else:
        for cell in cells:
            row = run_cell(cell)
            if row is not None:
                written.append(row)
    if config.model_free:
        row = run_model_free()
        if row is not None:
            written.append(row)

    write_paired_table(out_path)
    return written


def paired_path(out_path) -> Path:
    out_path = Path(out_path)
    return out_path.with_name(out_path.stem + "_paired.csv")


def write_paired_table(out_path) -> Path:
    """Per (window, components, transform): plain-fit F1 vs best contrastive F1."""
    out_path = Path(out_path)
    groups: dict[tuple[str, str, str], dict] = {}
    with open(out_path, "r", newline="") as handle:
        for row in csv.DictReader(handle):
            if row["status"] != "ok" or row["transform"] == "none" or row["f1"] == "":
                continue
            key = (row["window"], row["components"], row["transform"])
            group = groups.setdefault(key, {"baseline": None, "best": None, "alpha": None})
            alpha = float(row["alpha"])
            f1 = float(row["f1"])
            if alpha == 0.0:
                group["baseline"] = f1
            elif group["best"] is None or f1 > group["best"]:
                group["best"] = f1
                group["alpha"] = alpha

    target = paired_path(out_path)
    with open(target, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(
            ["window", "components", "transform", "f1_baseline", "f1_contrastive", "alpha_best"]
        )
        for key in sorted(groups, key=lambda k: (int(k[0]), int(k[1]), k[2])):
            group = groups[key]
            if group["baseline"] is None or group["best"] is None:
                continue
            writer.writerow(
                [
                    key[0],
                    key[1],
                    key[2],
                    repr(group["baseline"]),
                    repr(group["best"]),
                    repr(group["alpha"]),
                ]
            )
    return target


def best_f1(rows_path, contrastive: bool | None = None, model_free: bool = False) -> float:
    """Highest F1 among ok rows, filtered by kind.

    contrastive=True keeps alpha > 0 rows, False keeps alpha == 0 rows,
    None keeps any fitted row; model_free=True keeps only the baseline row.
    """
    best = -np.inf
    with open(rows_path, "r", newline="") as handle:
        for row in csv.DictReader(handle):
            if row["status"] != "ok" or row["f1"] == "":
                continue
            if model_free != (row["transform"] == "none"):
                continue
            if not model_free and contrastive is not None:
                alpha = float(row["alpha"])
                if contrastive and alpha == 0.0:
                    continue
                if not contrastive and alpha != 0.0:
                    continue
            best = max(best, float(row["f1"]))
    return best
