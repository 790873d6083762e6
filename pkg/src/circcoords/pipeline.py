"""End-to-end circular-coordinate pipeline with a reproducibility manifest.

Stage seeds are derived from the top-level seed as the first eight bytes
(little endian) of ``sha256(f"{seed}/{stage}")``, so any stage can be re-run
on its own with the same randomness.
"""
from __future__ import annotations

import configparser
import csv
import dataclasses
import hashlib
import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Tuple

import numpy as np

from . import __version__
from .coords import CircularCoordinates, classify_edges, combine_coords, extract_coords
from .datasets import (PointCloud, SamplerSpec, angle_of, load_matrix, save_point_cloud)
from .errors import ObstructionError, ParameterError
from .lift import lift, verify_integer_cocycle
from .persistence import check_prime, persistent_cohomology, significant_cocycles
from .rips import DEFAULT_MEMORY_CAP, build_rips, distance_matrix, restrict_to_scale
from .smooth import (OptimizerConfig, PenaltyConfig, objective, smooth_generalized,
                     smooth_l2_exact, smoothed_cocycle)
from . import viz

log = logging.getLogger(__name__)

SHAPE_DEFAULTS = {
    "ring": {"R": 1.5, "w": 1.5},
    "double_ring": {"R": 1.5, "w": 0.5, "offset": 2.0},
    "dupin": {"r": 2.0, "R": 1.5},
    "figure8_2d": {},
    "two_circles_3d": {},
}
SOURCES = tuple(SHAPE_DEFAULTS) + ("file",)
PLOTS = ("scatter", "correlation", "barcode", "coordinate", "density")
OUT_ENV = "CIRCCOORDS_OUT"


def stage_seed(seed: int, stage: str) -> int:
    digest = hashlib.sha256(f"{seed}/{stage}".encode()).digest()
    return int.from_bytes(digest[:8], "little")


def _floats(text):
    return tuple(float(x) for x in str(text).replace(";", ",").split(",") if x.strip())


def _opt_float(text):
    if text is None or str(text).strip().lower() in ("", "none", "auto"):
        return None
    return float(text)


def _opt_int(text):
    if text is None or str(text).strip().lower() in ("", "none"):
        return None
    return int(text)


def _bool(text):
    if isinstance(text, bool):
        return text
    return str(text).strip().lower() in ("1", "true", "yes", "on")


def _names(text):
    return tuple(x.strip() for x in str(text).split(",") if x.strip())


@dataclass
class PipelineConfig:
    """Every knob of a pipeline run; keys of the config file use the same names."""

    source: str = "ring"
    input_path: Optional[str] = None
    drop_first_columns: int = 0
    value_map: Optional[str] = None
    n: int = 300
    scheme: str = "parameter_uniform"
    R: Optional[float] = None
    w: Optional[float] = None
    r: Optional[float] = None
    offset: Optional[float] = None
    seed: int = 0
    prime: int = 23
    max_scale: Optional[float] = None
    tau: Optional[float] = 1.0
    top_k: Optional[int] = None
    scale_fraction: float = 1.0
    lambdas: Tuple[float, ...] = (0.0, 0.5, 1.0)
    learning_rate: float = 1e-4
    steps: int = 1000
    init: str = "zeros"
    sigma: float = 0.1
    l2_solver: str = "exact"
    l2_squared: bool = True
    constant_eps: float = 1e-4
    plots: Tuple[str, ...] = ("scatter", "correlation")
    angle_centers: Optional[Tuple[float, ...]] = None
    memory_cap: int = DEFAULT_MEMORY_CAP
    out_dir: str = "out"

    _converters = {
        "drop_first_columns": int, "n": int, "seed": int, "prime": int, "steps": int, "memory_cap": int,
        "R": _opt_float, "w": _opt_float, "r": _opt_float, "offset": _opt_float,
        "max_scale": _opt_float, "tau": _opt_float, "top_k": _opt_int,
        "scale_fraction": float, "learning_rate": float, "sigma": float, "constant_eps": float,
        "lambdas": _floats, "angle_centers": lambda t: None if str(t).strip().lower() in ("", "none", "auto") else _floats(t),
        "plots": _names, "l2_squared": _bool,
    }

    def __post_init__(self):
        self.validate()

    def validate(self):
        if self.source not in SOURCES:
            raise ParameterError(f"unknown source {self.source!r}; expected one of {SOURCES}")
        if self.source == "file" and not self.input_path:
            raise ParameterError("source=file needs input_path")
        check_prime(self.prime)
        if self.tau is None and self.top_k is None:
            raise ParameterError("give tau or top_k")
        if self.tau is not None and self.tau < 0:
            raise ParameterError("tau must be nonnegative")
        if self.top_k is not None and self.top_k < 1:
            raise ParameterError("top_k must be at least 1")
        if not 0.0 <= self.scale_fraction <= 1.0:
            raise ParameterError("scale_fraction must lie in [0, 1]")
        if not self.lambdas:
            raise ParameterError("need at least one lambda")
        for lam in self.lambdas:
            if not 0.0 <= lam <= 1.0:
                raise ParameterError(f"lambda must lie in [0, 1], got {lam}")
        if self.l2_solver not in ("exact", "adam"):
            raise ParameterError("l2_solver must be 'exact' or 'adam'")
        if not self.constant_eps > 0:
            raise ParameterError("constant_eps must be positive")
        for p in self.plots:
            if p not in PLOTS:
                raise ParameterError(f"unknown plot {p!r}; valid plots: {', '.join(PLOTS)}")
        if self.angle_centers is not None and len(self.angle_centers) % 2:
            raise ParameterError("angle_centers needs x,y pairs")
        OptimizerConfig(self.learning_rate, self.steps, init=self.init, sigma=self.sigma)

    @classmethod
    def field_names(cls):
        return [f.name for f in dataclasses.fields(cls)]

    def updated(self, **changes) -> "PipelineConfig":
        """A copy with string or typed values applied."""
        unknown = set(changes) - set(self.field_names())
        if unknown:
            raise ParameterError(f"unknown config keys: {', '.join(sorted(unknown))}")
        typed = {}
        for key, value in changes.items():
            conv = self._converters.get(key)
            typed[key] = conv(value) if conv is not None and isinstance(value, str) else value
            if key in ("lambdas", "angle_centers", "plots") and isinstance(typed[key], list):
                typed[key] = tuple(typed[key])
        return dataclasses.replace(self, **typed)

    def to_dict(self) -> dict:
        return {name: (list(v) if isinstance(v, tuple) else v)
                for name, v in ((n, getattr(self, n)) for n in self.field_names())}

    def shape_params(self) -> dict:
        params = dict(SHAPE_DEFAULTS.get(self.source, {}))
        for key in params:
            if getattr(self, key) is not None:
                params[key] = getattr(self, key)
        return params

    def parsed_value_map(self):
        if not self.value_map:
            return None
        out = {}
        for item in self.value_map.split(","):
            if not item.strip():
                continue
            token, _, value = item.partition(":")
            out[token.strip()] = float(value)
        return out


def read_config(path, base: Optional[PipelineConfig] = None) -> PipelineConfig:
    """Parse a flat ``key = value`` file (``#`` comments) into a config."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"config file not found: {path}")
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#",))
    parser.optionxform = str
    parser.read_string("[pipeline]\n" + path.read_text())
    return (base or PipelineConfig()).updated(**dict(parser["pipeline"]))


def load_input(cfg: PipelineConfig) -> PointCloud:
    if cfg.source == "file":
        return load_matrix(cfg.input_path, cfg.drop_first_columns, cfg.parsed_value_map())
    spec = SamplerSpec(cfg.source, cfg.n, cfg.scheme, stage_seed(cfg.seed, "generate"), cfg.shape_params())
    return spec.generate()


def point_angles(points, centers=None) -> np.ndarray:
    """Angle of each point about its nearest centre; points on a centre get angle 0."""
    pts = np.atleast_2d(points)[:, :2]
    c = np.zeros((1, 2)) if not centers else np.asarray(centers, dtype=float).reshape(-1, 2)
    nearest = np.argmin(np.linalg.norm(pts[:, None, :] - c[None], axis=2), axis=1)
    rel = pts - c[nearest]
    out = np.zeros(len(pts))
    ok = np.any(rel != 0, axis=1)
    if ok.any():
        out[ok] = angle_of(rel[ok])
    return out


def lam_tag(lam: float) -> str:
    return f"{lam:g}"


def _write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh, lineterminator="\n")
        out.writerow(header)
        out.writerows(rows)


def _dump_json(path, obj):
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _num(x):
    return "inf" if isinstance(x, float) and math.isinf(x) else x


def write_barcode(path, pairs, ids=None):
    ids = ids or {}
    rows = [[pr.dim, repr(float(pr.birth)), "inf" if not pr.is_finite else repr(float(pr.death)),
             ids.get(id(pr), "")] for pr in pairs]
    _write_csv(path, ["dim", "birth", "death", "cocycle_id"], rows)


def cocycle_records(pairs):
    """Degree-1 pairs numbered by decreasing persistence, as JSON-ready records."""
    h1 = significant_cocycles(pairs, tau=None, top_k=None, include_infinite=True)
    h1.sort(key=lambda pr: (-pr.persistence, pr.birth))
    ids, records = {}, []
    for k, pr in enumerate(h1):
        ids[id(pr)] = k
        rec = pr.cocycle.to_json(k)
        rec.update(birth=pr.birth, death=_num(float(pr.death)))
        records.append(rec)
    return ids, records


def run_persistence(cloud: PointCloud, prime=23, max_scale=None, memory_cap=DEFAULT_MEMORY_CAP):
    filt = build_rips(distance_matrix(cloud), max_scale, memory_cap=memory_cap)
    return filt, persistent_cohomology(filt, prime)


def working_scale(pair, fraction: float) -> float:
    if fraction >= 1.0:
        return pair.cocycle.scale
    return pair.birth + fraction * (pair.death - pair.birth)


@dataclass
class SmoothingRun:
    cocycle_id: int
    lam: float
    edges: np.ndarray
    edge_values: np.ndarray
    alpha: np.ndarray
    f: np.ndarray
    alpha_bar: np.ndarray
    constant: np.ndarray
    trace: np.ndarray
    scale: float

    @property
    def theta(self):
        return extract_coords(self.f)

    @property
    def objective_final(self) -> float:
        return float(self.trace[-1])


def smooth_cocycle(filt, pair, cfg: PipelineConfig, cocycle_id=0):
    """Lift, verify and smooth one cocycle for every lambda of ``cfg``."""
    t = working_scale(pair, cfg.scale_fraction)
    sl = restrict_to_scale(filt, t)
    ic = lift(pair.cocycle, cfg.prime)
    in_slice = filt.edge_values[[filt.edge_index[(int(u), int(v))] for u, v in ic.edges]] <= t \
        if len(ic.coeffs) else np.zeros(0, dtype=bool)
    ic.edges, ic.coeffs = ic.edges[in_slice], ic.coeffs[in_slice]
    ic.scale = t
    verify_integer_cocycle(ic, sl)
    alpha = ic.on_edges(sl.edges)
    runs = []
    for lam in cfg.lambdas:
        pc = PenaltyConfig(lam, l2_squared=cfg.l2_squared)
        if lam == 1.0 and cfg.l2_solver == "exact":
            f = smooth_l2_exact(alpha, sl.edges, filt.n)
            trace = np.array([objective(alpha, f, sl.edges, pc)])
        else:
            oc = OptimizerConfig(cfg.learning_rate, cfg.steps, init=cfg.init, sigma=cfg.sigma,
                                 seed=stage_seed(cfg.seed, f"smooth/{cocycle_id}/{lam_tag(lam)}"))
            f, trace = smooth_generalized(alpha, sl.edges, filt.n, pc, oc)
        abar = smoothed_cocycle(alpha, f, sl.edges)
        constant = classify_edges(abar, cfg.constant_eps).constant
        runs.append(SmoothingRun(cocycle_id, lam, sl.edges, sl.edge_values, alpha, f, abar, constant, trace, t))
    return ic, runs


def select_cocycles(pairs, cfg: PipelineConfig):
    chosen = significant_cocycles(pairs, cfg.tau, cfg.top_k)
    if not chosen:
        raise ObstructionError(
            f"no significant 1-cocycle (tau={cfg.tau}, top_k={cfg.top_k}): H^1 with integer "
            "coefficients is trivial at this threshold, which obstructs circle-valued coordinates")
    return chosen


def compute_coordinates(cloud, cfg: PipelineConfig, filt=None, pairs=None):
    """Persistence, selection, lifting and smoothing; returns everything needed for output."""
    if filt is None or pairs is None:
        filt, pairs = run_persistence(cloud, cfg.prime, cfg.max_scale, cfg.memory_cap)
    ids, records = cocycle_records(pairs)
    chosen = select_cocycles(pairs, cfg)
    lifted, runs = [], {}
    for pair in chosen:
        cid = ids[id(pair)]
        ic, rs = smooth_cocycle(filt, pair, cfg, cid)
        lifted.append((cid, ic))
        for run in rs:
            runs[(cid, run.lam)] = run
    return {"filtration": filt, "pairs": pairs, "ids": ids, "records": records,
            "chosen": chosen, "lifted": lifted, "runs": runs}


def write_coordinate_outputs(out: Path, cloud, cfg, result):
    """Coordinates, edges, traces and smoothing JSON per (cocycle, lambda)."""
    cids = [cid for cid, _ in result["lifted"]]
    written = []
    for lam in cfg.lambdas:
        tag = lam_tag(lam)
        thetas = [result["runs"][(cid, lam)].theta for cid in cids]
        cc = CircularCoordinates(np.column_stack(thetas), cids)
        comb = combine_coords(cc)
        rows = [[i] + [repr(float(x)) for x in cc.theta[i]] + [repr(float(comb[i]))] for i in range(cloud.n)]
        path = out / f"coords_lam{tag}.csv"
        _write_csv(path, ["point_index"] + [f"theta_{c}" for c in cids] + ["combined"], rows)
        written.append(path)
        for cid in cids:
            run = result["runs"][(cid, lam)]
            stem = f"c{cid}_lam{tag}"
            _write_csv(out / f"edges_{stem}.csv", ["u", "v", "value", "alpha_bar", "constant_flag"],
                       [[int(u), int(v), repr(float(x)), repr(float(a)), int(c)]
                        for (u, v), x, a, c in zip(run.edges, run.edge_values, run.alpha_bar, run.constant)])
            _write_csv(out / f"trace_{stem}.csv", ["step", "objective"],
                       [[k, repr(float(v))] for k, v in enumerate(run.trace)])
            _dump_json(out / f"smoothing_{stem}.json", {
                "lambda": lam, "cocycle_id": cid, "scale": run.scale,
                "f": [float(x) for x in run.f], "alpha_bar": [float(x) for x in run.alpha_bar],
                "objective_final": run.objective_final,
                "constant_edges": int(np.count_nonzero(run.constant)), "edges": int(run.constant.size)})
            written += [out / f"edges_{stem}.csv", out / f"trace_{stem}.csv", out / f"smoothing_{stem}.json"]
    return written


def write_plots(out: Path, cloud, cfg, result):
    cids = [cid for cid, _ in result["lifted"]]
    centers = cfg.angle_centers
    if centers is None and cfg.source == "double_ring":
        off = cfg.shape_params()["offset"]
        centers = (-off, 0.0, off, 0.0)
    angles = point_angles(cloud.points, centers)
    if "barcode" in cfg.plots:
        viz.emit_barcode(result["pairs"], title="barcode").write(out / "barcode.svg", out / "barcode_plot.csv")
    for lam in cfg.lambdas:
        tag = lam_tag(lam)
        thetas = []
        for cid in cids:
            run = result["runs"][(cid, lam)]
            thetas.append(run.theta)
            stem = f"c{cid}_lam{tag}"
            if "scatter" in cfg.plots:
                viz.emit_colored_scatter(cloud.points, run.theta, run.edges, run.constant,
                                         title=f"cocycle {cid}, lambda={tag}").write(
                    out / f"scatter_{stem}.svg", out / f"scatter_{stem}.csv")
            if "correlation" in cfg.plots:
                viz.emit_correlation(angles, run.theta, title=f"cocycle {cid}, lambda={tag}").write(
                    out / f"correlation_{stem}.svg", out / f"correlation_{stem}.csv")
        if "coordinate" in cfg.plots and len(thetas) >= 2:
            viz.emit_coordinate_plot(thetas[0], thetas[1], title=f"lambda={tag}").write(
                out / f"coordinate_lam{tag}.svg", out / f"coordinate_lam{tag}.csv")
        if "density" in cfg.plots:
            viz.emit_density(thetas, combine_coords(np.column_stack(thetas)), title=f"lambda={tag}").write(
                out / f"density_lam{tag}.svg", out / f"density_lam{tag}.csv")


def file_hash(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def run_pipeline(cfg: PipelineConfig, out_dir=None) -> dict:
    """Run every stage and write the artifact directory; returns the manifest."""
    out = Path(out_dir or cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    cloud = load_input(cfg)
    save_point_cloud(out / "points.csv", cloud)
    log.info("input: %d points in R^%d", cloud.n, cloud.d)
    result = compute_coordinates(cloud, cfg)
    filt = result["filtration"]
    write_barcode(out / "barcode.csv", result["pairs"], result["ids"])
    _dump_json(out / "cocycles.json", result["records"])
    _dump_json(out / "integer_cocycles.json", [ic.to_json(cid) for cid, ic in result["lifted"]])
    write_coordinate_outputs(out, cloud, cfg, result)
    write_plots(out, cloud, cfg, result)
    report = {
        "n_points": cloud.n, "dim": cloud.d, "max_scale": filt.max_scale, "n_edges": filt.n_edges,
        "h0_bars": sum(1 for p in result["pairs"] if p.dim == 0),
        "h1_bars": sum(1 for p in result["pairs"] if p.dim == 1),
        "selected": [{"cocycle_id": cid, "birth": pr.birth, "death": _num(float(pr.death)),
                      "persistence": _num(float(pr.persistence))}
                     for (cid, _), pr in zip(result["lifted"], result["chosen"])],
        "smoothing": [{"cocycle_id": cid, "lambda": lam, "working_scale": run.scale, "edges": int(run.constant.size),
                       "constant_edges": int(np.count_nonzero(run.constant)), "objective_final": run.objective_final}
                      for (cid, lam), run in sorted(result["runs"].items())],
    }
    _dump_json(out / "report.json", report)
    outputs = {p.name: file_hash(p) for p in sorted(out.iterdir()) if p.is_file() and p.name != "manifest.json"}
    manifest = {
        "package_version": __version__,
        "config": cfg.to_dict(),
        "seeds": {"generate": stage_seed(cfg.seed, "generate"),
                  "smooth": {f"{cid}/{lam_tag(lam)}": stage_seed(cfg.seed, f"smooth/{cid}/{lam_tag(lam)}")
                             for cid, _ in result["lifted"] for lam in cfg.lambdas}},
        "outputs": outputs,
    }
    _dump_json(out / "manifest.json", manifest)
    return manifest


def config_from_manifest(path) -> PipelineConfig:
    data = json.loads(Path(path).read_text())
    raw = data["config"]
    for key in ("lambdas", "plots", "angle_centers"):
        if raw.get(key) is not None:
            raw[key] = tuple(raw[key])
    return PipelineConfig(**raw)


def rerun_manifest(path, out_dir) -> Tuple[bool, dict]:
    """Re-execute a manifest into ``out_dir``; returns (all hashes equal, mismatches)."""
    old = json.loads(Path(path).read_text())
    new = run_pipeline(config_from_manifest(path), out_dir)
    keys = set(old["outputs"]) | set(new["outputs"])
    diff = {k: (old["outputs"].get(k), new["outputs"].get(k)) for k in sorted(keys)
            if old["outputs"].get(k) != new["outputs"].get(k)}
    return not diff, diff
