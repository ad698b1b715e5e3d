"""Command-line pipeline around the library.

Subcommands: synth, fit, decompose, alpha-search, cluster, evaluate,
sweep. Exit code 0 on success, 1 on numeric or algorithmic failure, 2 on
input or configuration errors (argparse failures included).
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

from . import alpha_search as alpha_search_mod
from . import sweep as sweep_mod
from .cluster import (
    ClusterAssignment,
    cached_similarity_matrix,
    spectral_cluster,
)
from .core import (
    fit_basis,
    load_basis,
    project,
    reconstruct,
    save_basis,
)
from .errors import CmssaError, DataError, InputError, NumericError, ParameterError
from .evaluate import bcubed
from .ingest import center, load_collection, save_collection
from .synthetic import SynthConfig, generate_background, generate_foreground

logger = logging.getLogger(__name__)


def _csv_ints(text: str) -> tuple[int, ...]:
    return tuple(int(v) for v in text.split(",") if v != "")

def _csv_floats(text: str) -> tuple[float, ...]:
    return tuple(float(v) for v in text.split(",") if v != "")

def _csv_names(text: str) -> tuple[str, ...]:
    return tuple(v.strip() for v in text.split(",") if v.strip() != "")


def cmd_synth(args) -> None:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    bg_config = SynthConfig(
        length=args.length,
        variance_fraction=args.variance_fraction,
        seed=args.seed,
    )
    fg_config = SynthConfig(
        length=args.length,
        variance_fraction=args.variance_fraction,
        seed=args.seed + 1,  # independent draw
    )
    background = generate_background(bg_config)
    foreground, subsignal = generate_foreground(fg_config)
    save_collection(out / "background.csv", [background], delimiter=args.delimiter)
    save_collection(out / "foreground.csv", [foreground], delimiter=args.delimiter)
    with open(out / "subsignal.csv", "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["t", "value"])
        for t, v in enumerate(subsignal):
            writer.writerow([t, repr(float(v))])
    print(f"wrote foreground.csv, background.csv, subsignal.csv to {out}")


def cmd_fit(args) -> None:
    foreground = load_collection(args.foreground, delimiter=args.delimiter)
    background = (
        load_collection(args.background, delimiter=args.delimiter)
        if args.background
        else None
    )
    if args.alpha_auto:
        if background is None:
            raise ParameterError("--alpha-auto requires --background")
        selection = alpha_search_mod.search(
            foreground,
            background,
            args.window,
            args.components,
            alpha_min=args.alpha_min,
            alpha_max=args.alpha_max,
            n=args.alpha_n,
            m=args.alpha_m,
            seed=args.seed,
        )
        alphas = selection.selected
    else:
        alphas = (args.alpha,)
    out = Path(args.out)
    written = []
    for index, alpha in enumerate(alphas):
        basis = fit_basis(foreground, background, args.window, args.components, alpha)
        if len(alphas) == 1:
            path = out
        else:
            path = out.with_name(f"{out.stem}_{index:02d}{out.suffix}")
        save_basis(path, basis)
        written.append({"alpha": alpha, "model": str(path)})
        print(f"alpha={alpha:g}: eigenvalues {basis.eigenvalues} -> {path}")
    if len(written) > 1:
        index_path = out.with_name(f"{out.stem}_index.json")
        with open(index_path, "w") as handle:
            json.dump(written, handle, indent=2)
        print(f"wrote model index to {index_path}")


def _pick_series(collection, series_id):
    if series_id is None:
        if len(collection) != 1:
            raise ParameterError(
                f"input holds {len(collection)} series; pick one with --series-id"
            )
        return collection[0]
    for s in collection:
        if s.series_id == series_id:
            return s
    raise DataError(f"series '{series_id}' not found in input")


def cmd_decompose(args) -> None:
    basis = load_basis(args.model)
    series = _pick_series(
        load_collection(args.series, delimiter=args.delimiter), args.series_id
    )
    centered = center(series)
    decomposition = reconstruct(centered, basis)
    prefix = Path(args.out)
    prefix.parent.mkdir(parents=True, exist_ok=True)

    def write_matrix(path, header, matrix, t0=0):
        with open(path, "w", newline="") as handle:
            writer = csv.writer(handle)
            writer.writerow(["t"] + header)
            for t, row in enumerate(matrix, start=t0):
                writer.writerow([t] + [repr(float(v)) for v in row])

    k, d = basis.k, basis.channels
    write_matrix(
        f"{prefix}_pcs.csv",
        [f"pc{c + 1}" for c in range(k)],
        decomposition.pcs,
    )
    write_matrix(
        f"{prefix}_rcs.csv",
        [f"rc{c + 1}_ch{j + 1}" for c in range(k) for j in range(d)],
        decomposition.rcs,
    )
    for c in range(k):
        write_matrix(
            f"{prefix}_rc{c + 1:02d}.csv",
            [f"ch{j + 1}" for j in range(d)],
            decomposition.component(c),
        )
    means = centered.channel_means if args.restore_mean else None
    write_matrix(
        f"{prefix}_sum.csv",
        [f"ch{j + 1}" for j in range(d)],
        decomposition.summed_rcs(means),
    )
    print(f"wrote pcs, rcs, {k} component files, and sum with prefix {prefix}")


def cmd_alpha_search(args) -> None:
    foreground = load_collection(args.foreground, delimiter=args.delimiter)
    background = load_collection(args.background, delimiter=args.delimiter)
    selection = alpha_search_mod.search(
        foreground,
        background,
        args.window,
        args.components,
        alpha_min=args.alpha_min,
        alpha_max=args.alpha_max,
        n=args.alpha_n,
        m=args.alpha_m,
        seed=args.seed,
    )
    payload = {
        "candidates": len(selection.cluster_assignments),
        "selected": list(selection.selected),
        "clusters": selection.clusters(),
    }
    text = json.dumps(payload, indent=2)
    if args.out:
        Path(args.out).write_text(text + "\n")
    print(text)


def cmd_cluster(args) -> None:
    collection = load_collection(args.series, delimiter=args.delimiter)
    ids = [s.series_id for s in collection]
    if args.model:
        basis = load_basis(args.model)
        features = []
        for s in collection:
            centered = center(s)
            if args.transform == "pc":
                features.append(project(centered, basis))
            else:
                features.append(reconstruct(centered, basis).rcs)
    else:
        features = [s.values for s in collection]
    matrix = cached_similarity_matrix(
        features, ids, args.radius, cache_dir=args.sim_cache, jobs=args.jobs
    )
    assignment = spectral_cluster(matrix, args.clusters, args.seed)
    with open(args.out, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["series_id", "cluster"])
        for sid in ids:
            writer.writerow([sid, assignment.assignments[sid]])
    print(f"wrote {args.clusters}-cluster assignments for {len(ids)} series to {args.out}")


def _load_assignments(path) -> ClusterAssignment:
    try:
        handle = open(path, "r", newline="")
    except OSError as exc:
        raise DataError(f"cannot read assignments file '{path}': {exc}") from exc
    with handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if header != ["series_id", "cluster"]:
            raise DataError(f"'{path}': expected header series_id,cluster")
        mapping = {}
        for row in reader:
            if len(row) != 2:
                raise DataError(f"'{path}' line {reader.line_num}: bad row {row}")
            mapping[row[0]] = int(row[1])
    if not mapping:
        raise DataError(f"'{path}': no assignments found")
    return ClusterAssignment(mapping, k=max(mapping.values()) + 1)


def cmd_evaluate(args) -> None:
    assignment = _load_assignments(args.assignments)
    collection = load_collection(args.series, delimiter=args.delimiter)
    gold = {s.series_id: s.label for s in collection if s.label is not None}
    config = {}
    if args.model:
        basis = load_basis(args.model)
        config = {
            "window": basis.window,
            "k": basis.k,
            "alpha": basis.alpha,
            "transform": args.transform,
        }
    report = bcubed(assignment, gold, config=config)
    text = json.dumps(report.to_dict(), indent=2)
    if args.out:
        Path(args.out).write_text(text + "\n")
    print(text)


def cmd_sweep(args) -> None:
    values: dict = {}
    if args.config:
        try:
            with open(args.config, "r") as handle:
                loaded = json.load(handle)
        except OSError as exc:
            raise DataError(f"cannot read config file '{args.config}': {exc}") from exc
        except json.JSONDecodeError as exc:
            raise DataError(f"config file '{args.config}' is not valid JSON: {exc}") from exc
        if not isinstance(loaded, dict):
            raise DataError(f"config file '{args.config}' must hold one flat object")
        values.update(loaded)
    overrides = {
        "foreground": args.foreground,
        "background": args.background,
        "out": args.out,
        "windows": args.windows,
        "components": args.components,
        "transforms": args.transforms,
        "alphas": args.alphas,
        "alpha_min": args.alpha_min,
        "alpha_max": args.alpha_max,
        "alpha_n": args.alpha_n,
        "alpha_m": args.alpha_m,
        "clusters": args.clusters,
        "radius": args.radius,
        "seed": args.seed,
        "jobs": args.jobs,
        "model_free": True if args.model_free else None,
        "cache_dir": args.cache_dir,
    }
    values.update({k: v for k, v in overrides.items() if v is not None})
    if args.alpha_auto:
        values["alphas"] = None
    for field in ("foreground", "background", "out"):
        if not values.get(field):
            raise ParameterError(f"sweep needs '{field}' from a flag or the config file")
    known = {f.name for f in sweep_mod.SweepConfig.__dataclass_fields__.values()}
    unknown = set(values) - known
    if unknown:
        raise ParameterError(f"unknown sweep config keys: {sorted(unknown)}")
    try:
        config = sweep_mod.SweepConfig(**values)
    except TypeError as exc:
        raise ParameterError(f"bad sweep config: {exc}") from exc
    rows = sweep_mod.run_sweep(config)
    print(
        f"sweep wrote {len(rows)} new rows to {config.out}; "
        f"paired table at {sweep_mod.paired_path(config.out)}"
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cmssa",
        description=(
            "Contrastive multivariate singular spectrum analysis: decompose "
            "multichannel series against a background, search contrast "
            "strengths, cluster, and evaluate."
        ),
    )
    parser.add_argument(
        "-v", "--verbose", action="count", default=0, help="increase log detail"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_delimiter(p):
        p.add_argument(
            "--delimiter",
            default=None,
            help="CSV delimiter (default: $CMSSA_DELIMITER or comma)",
        )

    synth = sub.add_parser("synth", help="generate a synthetic foreground/background pair")
    synth.add_argument("--seed", type=int, default=0)
    synth.add_argument("--length", type=int, default=2000)
    synth.add_argument("--variance-fraction", type=float, default=0.05)
    synth.add_argument("--out", required=True, help="output directory")
    add_delimiter(synth)
    synth.set_defaults(func=cmd_synth)

    fit = sub.add_parser("fit", help="fit an eigenbasis model")
    fit.add_argument("--foreground", required=True)
    fit.add_argument("--background", default=None)
    fit.add_argument("--window", type=int, required=True)
    fit.add_argument("--components", type=int, required=True)
    fit.add_argument("--alpha", type=float, default=0.0)
    fit.add_argument(
        "--alpha-auto",
        action="store_true",
        help="search for alphas and write one model per selection",
    )
    fit.add_argument("--alpha-min", type=float, default=1e-3)
    fit.add_argument("--alpha-max", type=float, default=1e3)
    fit.add_argument("--alpha-n", type=int, default=300)
    fit.add_argument("--alpha-m", type=int, default=5)
    fit.add_argument("--seed", type=int, default=0)
    fit.add_argument("--out", required=True, help="model JSON path")
    add_delimiter(fit)
    fit.set_defaults(func=cmd_fit)

    dec = sub.add_parser("decompose", help="apply a model to one series")
    dec.add_argument("--model", required=True)
    dec.add_argument("--series", required=True)
    dec.add_argument("--series-id", default=None)
    dec.add_argument(
        "--restore-mean",
        action="store_true",
        help="re-add channel means to the summed reconstruction",
    )
    dec.add_argument("--out", required=True, help="output file prefix")
    add_delimiter(dec)
    dec.set_defaults(func=cmd_decompose)

    search = sub.add_parser("alpha-search", help="select contrast strengths")
    search.add_argument("--foreground", required=True)
    search.add_argument("--background", required=True)
    search.add_argument("--window", type=int, required=True)
    search.add_argument("--components", type=int, required=True)
    search.add_argument("--alpha-min", type=float, default=1e-3)
    search.add_argument("--alpha-max", type=float, default=1e3)
    search.add_argument("--alpha-n", type=int, default=300)
    search.add_argument("--alpha-m", type=int, default=5)
    search.add_argument("--seed", type=int, default=0)
    search.add_argument("--out", default=None, help="optional JSON output path")
    add_delimiter(search)
    search.set_defaults(func=cmd_alpha_search)

    clu = sub.add_parser("cluster", help="cluster series by DTW similarity")
    clu.add_argument("--series", required=True)
    clu.add_argument("--model", default=None, help="omit to cluster raw series")
    clu.add_argument("--transform", choices=("pc", "rc"), default="pc")
    clu.add_argument("--clusters", type=int, required=True)
    clu.add_argument("--radius", type=int, default=1)
    clu.add_argument("--seed", type=int, default=0)
    clu.add_argument("--jobs", type=int, default=1)
    clu.add_argument("--sim-cache", default=None, help="similarity cache directory")
    clu.add_argument("--out", required=True, help="assignments CSV path")
    add_delimiter(clu)
    clu.set_defaults(func=cmd_cluster)

    ev = sub.add_parser("evaluate", help="score assignments against gold labels")
    ev.add_argument("--assignments", required=True)
    ev.add_argument("--series", required=True, help="collection CSV with gold labels")
    ev.add_argument("--model", default=None, help="echo this model's config in the report")
    ev.add_argument("--transform", choices=("pc", "rc"), default="pc")
    ev.add_argument("--out", default=None, help="optional JSON output path")
    add_delimiter(ev)
    ev.set_defaults(func=cmd_evaluate)

    sw = sub.add_parser("sweep", help="grid sweep with resumable CSV output")
    sw.add_argument("--config", default=None, help="flat JSON config file")
    sw.add_argument("--foreground", default=None)
    sw.add_argument("--background", default=None)
    sw.add_argument("--windows", type=_csv_ints, default=None)
    sw.add_argument("--components", type=_csv_ints, default=None)
    sw.add_argument("--transforms", type=_csv_names, default=None)
    sw.add_argument("--alphas", type=_csv_floats, default=None)
    sw.add_argument(
        "--alpha-auto",
        action="store_true",
        help="ignore --alphas and search per grid cell",
    )
    sw.add_argument("--alpha-min", type=float, default=None)
    sw.add_argument("--alpha-max", type=float, default=None)
    sw.add_argument("--alpha-n", type=int, default=None)
    sw.add_argument("--alpha-m", type=int, default=None)
    sw.add_argument("--clusters", type=int, default=None)
    sw.add_argument("--radius", type=int, default=None)
    sw.add_argument("--seed", type=int, default=None)
    sw.add_argument("--jobs", type=int, default=None)
    sw.add_argument("--model-free", action="store_true")
    sw.add_argument("--cache-dir", default=None)
    sw.add_argument("--out", default=None)
    sw.set_defaults(func=cmd_sweep)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    try:
        args.func(args)
        return 0
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except CmssaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
