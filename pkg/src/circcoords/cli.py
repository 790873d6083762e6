"""Command-line interface: ``circcoords <subcommand> ...``.

The default output directory is taken from ``$CIRCCOORDS_OUT`` (else ``out``).
With ``--json`` errors are written to stderr as a JSON object.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from pathlib import Path
from typing import NamedTuple

import numpy as np

from . import __version__, viz
from .coords import torus_embed
from .datasets import SamplerSpec, load_matrix, save_point_cloud
from .errors import CircCoordsError, FormatError, ParameterError
from .evaluate import block_sharpness, coranking
from .pipeline import (OUT_ENV, PipelineConfig, cocycle_records, compute_coordinates, read_config,
                       rerun_manifest, run_persistence, run_pipeline, write_barcode,
                       write_coordinate_outputs, _dump_json)

log = logging.getLogger("circcoords")

SHAPE_ALIASES = {"ring": "ring", "double_ring": "double_ring", "dupin": "dupin",
                 "figure8": "figure8_2d", "figure8_2d": "figure8_2d",
                 "two_circles": "two_circles_3d", "two_circles_3d": "two_circles_3d"}


class Bar(NamedTuple):
    dim: int
    birth: float
    death: float


def default_out() -> Path:
    return Path(os.environ.get(OUT_ENV) or "out")


def _out_dir(args) -> Path:
    out = Path(args.out_dir) if getattr(args, "out_dir", None) else default_out()
    out.mkdir(parents=True, exist_ok=True)
    return out


def _read_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise FormatError(f"{path}: empty file")
    return rows[0], rows[1:]


def _theta_columns(path):
    header, rows = _read_csv(path)
    idx = [j for j, h in enumerate(header) if h.startswith("theta_")]
    if not idx:
        raise FormatError(f"{path}: no theta_* columns")
    try:
        return [np.array([float(r[j]) for r in rows]) for j in idx]
    except (ValueError, IndexError) as exc:
        raise FormatError(f"{path}: bad coordinate value: {exc}") from None


def cmd_generate(args):
    shape = SHAPE_ALIASES[args.shape]
    params = {k: getattr(args, k) for k in ("R", "w", "r", "offset") if getattr(args, k) is not None}
    cloud = SamplerSpec(shape, args.n, args.scheme, args.seed, params).generate()
    path = Path(args.output) if args.output else _out_dir(args) / f"{shape}.csv"
    path.parent.mkdir(parents=True, exist_ok=True)
    save_point_cloud(path, cloud)
    print(f"wrote {cloud.n} points in R^{cloud.d} to {path}")


def _config_from_args(args) -> PipelineConfig:
    cfg = read_config(args.config) if getattr(args, "config", None) else PipelineConfig()
    changes = {"source": "file", "input_path": args.input}
    for key in ("prime", "max_scale", "tau", "top_k", "scale_fraction", "steps", "learning_rate",
                "constant_eps", "l2_solver", "drop_first_columns", "value_map"):
        value = getattr(args, key, None)
        if value is not None:
            changes[key] = value
    if getattr(args, "lambdas", None):
        changes["lambdas"] = args.lambdas
    return cfg.updated(**changes)


def _load(args):
    vm = None
    if getattr(args, "value_map", None):
        vm = PipelineConfig(value_map=args.value_map).parsed_value_map()
    return load_matrix(args.input, getattr(args, "drop_first_columns", 0) or 0, vm)


def cmd_persistence(args):
    cloud = _load(args)
    filt, pairs = run_persistence(cloud, args.prime, args.max_scale)
    out = _out_dir(args)
    ids, records = cocycle_records(pairs)
    write_barcode(out / "barcode.csv", pairs, ids)
    _dump_json(out / "cocycles.json", records)
    h1 = sum(1 for p in pairs if p.dim == 1)
    print(f"{len(pairs) - h1} degree-0 and {h1} degree-1 bars; wrote {out / 'barcode.csv'} and {out / 'cocycles.json'}")


def cmd_coords(args):
    cfg = _config_from_args(args)
    cloud = _load(args)
    result = compute_coordinates(cloud, cfg)
    out = _out_dir(args)
    write_barcode(out / "barcode.csv", result["pairs"], result["ids"])
    _dump_json(out / "cocycles.json", result["records"])
    write_coordinate_outputs(out, cloud, cfg, result)
    ids = [cid for cid, _ in result["lifted"]]
    print(f"{len(ids)} cocycle(s) {ids} smoothed at lambda {list(cfg.lambdas)}; outputs in {out}")


def cmd_plot(args):
    if args.kind not in viz.KINDS:
        raise ParameterError(f"unknown plot kind {args.kind!r}; valid kinds: {', '.join(viz.KINDS)}")
    spec = viz.PlotSpec(args.kind)
    if args.kind == "barcode":
        header, rows = _read_csv(args.barcode)
        pairs = [Bar(int(r[0]), float(r[1]), float(r[2])) for r in rows]
        fig = viz.emit_barcode(pairs, spec, args.title)
    elif args.kind == "density":
        fig = viz.emit_density(_theta_columns(args.coords), spec=spec, title=args.title)
    elif args.kind == "coordinate_plot":
        cols = _theta_columns(args.coords)
        if len(cols) < 2:
            raise FormatError("coordinate_plot needs two theta columns")
        fig = viz.emit_coordinate_plot(cols[0], cols[1], spec, args.title)
    else:
        theta = _theta_columns(args.coords)[args.column]
        pts = load_matrix(args.points).points
        if args.kind == "colored_scatter":
            edges = constant = None
            if args.edges:
                header, rows = _read_csv(args.edges)
                edges = np.array([[int(r[0]), int(r[1])] for r in rows], dtype=np.int64).reshape(-1, 2)
                constant = np.array([r[4] == "1" for r in rows], dtype=bool)
            fig = viz.emit_colored_scatter(pts, theta, edges, constant, spec, args.title)
        else:
            from .pipeline import point_angles
            fig = viz.emit_correlation(point_angles(pts, args.center), theta, spec, args.title)
    out = _out_dir(args)
    stem = out / (args.name or f"plot_{args.kind}")
    fig.write(stem.with_suffix(".svg"), stem.with_suffix(".csv"))
    print(f"wrote {stem.with_suffix('.svg')} and {stem.with_suffix('.csv')}")


def cmd_corank(args):
    high = load_matrix(args.high, args.drop_first_columns or 0)
    if args.low:
        low = load_matrix(args.low)
    else:
        low = torus_embed(np.vstack(_theta_columns(args.coords)).T)
    Q = coranking(high, low)
    out = _out_dir(args)
    np.savetxt(out / "coranking.csv", Q, fmt="%d", delimiter=",")
    n = high.n
    k = min(args.k, n - 1)
    report = {"n": n, "k": k,
              "diagonal_fraction": float(np.trace(Q) / Q.sum()),
              "within_k_fraction": float(Q[:k, :k].sum() / (k * n))}
    if args.labels:
        labels = np.loadtxt(args.labels, dtype=str, delimiter=",", ndmin=1)
        report["block_sharpness"] = block_sharpness(Q, labels)
    _dump_json(out / "corank_report.json", report)
    print(json.dumps(report, sort_keys=True))


def cmd_pipeline(args):
    if args.manifest:
        out = Path(args.out_dir) if args.out_dir else default_out()
        same, diff = rerun_manifest(args.manifest, out)
        if not same:
            raise CircCoordsError(f"re-run differs from manifest in {len(diff)} file(s): {', '.join(diff)}")
        print(f"re-run in {out} reproduces every output hash of {args.manifest}")
        return
    if not args.config:
        raise ParameterError("pipeline needs a config file or --manifest")
    cfg = read_config(args.config)
    overrides = dict(item.split("=", 1) for item in args.set or [])
    if overrides:
        cfg = cfg.updated(**{k.strip(): v.strip() for k, v in overrides.items()})
    out = Path(args.out_dir) if args.out_dir else (default_out() if os.environ.get(OUT_ENV) else Path(cfg.out_dir))
    manifest = run_pipeline(cfg, out)
    print(f"wrote {len(manifest['outputs'])} files and manifest.json to {out}")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="circcoords", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    ap.add_argument("--json", action="store_true", help="report errors as JSON on stderr")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="sample a synthetic point cloud")
    g.add_argument("shape", choices=sorted(SHAPE_ALIASES))
    g.add_argument("--n", type=int, default=300)
    g.add_argument("--R", type=float)
    g.add_argument("--w", type=float)
    g.add_argument("--r", type=float)
    g.add_argument("--offset", type=float)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--scheme", default="parameter_uniform", choices=("parameter_uniform", "volume_uniform"))
    g.add_argument("-o", "--output")
    g.add_argument("--out-dir")
    g.set_defaults(func=cmd_generate)

    def input_opts(p):
        p.add_argument("input", help="point-cloud CSV")
        p.add_argument("--drop-first-columns", type=int, default=0)
        p.add_argument("--value-map", help="token:value pairs, e.g. y:1,n:-1,?:0")
        p.add_argument("--prime", type=int, default=23)
        p.add_argument("--max-scale", type=float)
        p.add_argument("--out-dir")

    p = sub.add_parser("persistence", help="barcode and representative cocycles")
    input_opts(p)
    p.set_defaults(func=cmd_persistence)

    c = sub.add_parser("coords", help="sparse circular coordinates of a point cloud")
    input_opts(c)
    c.add_argument("--config")
    c.add_argument("--tau", type=float)
    c.add_argument("--top-k", type=int)
    c.add_argument("--scale-fraction", type=float)
    c.add_argument("--lambdas", help="comma-separated, e.g. 0,0.5,1")
    c.add_argument("--steps", type=int)
    c.add_argument("--learning-rate", type=float)
    c.add_argument("--constant-eps", type=float)
    c.add_argument("--l2-solver", choices=("exact", "adam"))
    c.set_defaults(func=cmd_coords)

    pl = sub.add_parser("plot", help="render one figure (SVG plus CSV twin)")
    pl.add_argument("kind", help=f"one of {', '.join(viz.KINDS)}")
    pl.add_argument("--points")
    pl.add_argument("--coords")
    pl.add_argument("--column", type=int, default=0)
    pl.add_argument("--edges")
    pl.add_argument("--barcode")
    pl.add_argument("--center", type=float, nargs=2, default=(0.0, 0.0))
    pl.add_argument("--title", default="")
    pl.add_argument("--name")
    pl.add_argument("--out-dir")
    pl.set_defaults(func=cmd_plot)

    k = sub.add_parser("corank", help="coranking matrix between two representations")
    k.add_argument("high")
    k.add_argument("low", nargs="?")
    k.add_argument("--coords", help="coords CSV; its torus embedding is used as the low representation")
    k.add_argument("--drop-first-columns", type=int, default=0)
    k.add_argument("--labels", help="one label per point, comma or newline separated")
    k.add_argument("--k", type=int, default=10)
    k.add_argument("--out-dir")
    k.set_defaults(func=cmd_corank)

    pp = sub.add_parser("pipeline", help="run every stage from a config file, or re-run a manifest")
    pp.add_argument("config", nargs="?")
    pp.add_argument("--manifest")
    pp.add_argument("--set", action="append", metavar="KEY=VALUE")
    pp.add_argument("--out-dir")
    pp.set_defaults(func=cmd_pipeline)
    return ap


def _exit_code(exc) -> int:
    if isinstance(exc, (ParameterError, FormatError, FileNotFoundError, ValueError)):
        return 2
    return 1


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "corank" and not (args.low or args.coords):
            raise ParameterError("corank needs a low-dimensional CSV or --coords")
        args.func(args)
    except (CircCoordsError, ValueError, ArithmeticError, MemoryError, RuntimeError,
            NotImplementedError, OSError) as exc:
        if args.json:
            payload = {"error": type(exc).__name__, "message": str(exc)}
            for attr in ("step", "violations"):
                if getattr(exc, attr, None) is not None:
                    payload[attr] = getattr(exc, attr)
            print(json.dumps(payload, default=str), file=sys.stderr)
        else:
            print(f"error: {exc}", file=sys.stderr)
        return _exit_code(exc)
    return 0


if __name__ == "__main__":
    sys.exit(main())
