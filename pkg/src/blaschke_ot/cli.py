"""Command-line entry point: ``blaschke-ot {mtw-audit,sublevel,roll,reflector}``.

Every run writes one key-sorted JSON envelope containing the resolved
configuration and the result payload.  Exit codes: 0 for consistent
results, 1 for errors, 2 only for a finding that contradicts the theory
(an MTW violation, or dominance without inclusion).
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
import time
import warnings
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__
from .cost_models import power_cost
from .diff_geometry import Polyline2D, ellipsoid, gauss_inverse_many, polyline_convexity, sphere
from .errors import ConfigError, GeometryError, UnboundedLevelSetWarning
from .mtw_audit import VIOLATED, SamplerConfig, audit_grid
from .reflector import Paraboloid, align_paraboloid_tangency, reflector_inclusion
from .rolling_inclusion import (
    Theorem2Config,
    blaschke_verdict,
    disk_tangent_inside,
    random_convex_curve,
    random_unit_vectors,
    theorem2_pipeline,
)
from .sublevel_geometry import (
    FIGURE2_SETS,
    SublevelSpec,
    build_sublevel_psi,
    find_seed_2d,
    min_curvature_along,
    tangential_hessian_min,
    trace_level_curve_2d,
    _trace_box,
)

SCHEMA_VERSION = 1
SUBCOMMANDS = ("mtw-audit", "sublevel", "roll", "reflector")


@dataclass
class RunConfig:
    subcommand: str = "mtw-audit"
    p: float = -2.0
    dim: int = 2
    y1: list = field(default_factory=lambda: list(FIGURE2_SETS[1]["y1"]))
    y2: list = field(default_factory=lambda: list(FIGURE2_SETS[1]["y2"]))
    a: float = FIGURE2_SETS[1]["a"]
    figure: Optional[int] = None
    samples: int = 1000
    normals: int = 200
    seed: int = 0
    tol: float = 1e-5
    step: float = 0.01
    box: float = 2.0
    p_min: float = 0.2
    p_max: float = 5.0
    mode: str = "blaschke"
    inner: str = "circle:1"
    outer: str = "circle:2"
    contact: list = field(default_factory=lambda: [1.0, 0.0])
    scale: float = 1.5
    sweep_count: int = 20
    disk_radius: float = 0.2
    sigma1: float = 0.5
    sigma2: float = 1.0
    z2: list = field(default_factory=lambda: [0.0, 0.0])
    z2_last: float = 0.0
    contact_x: list = field(default_factory=lambda: [1.0, 0.0])
    half_width: float = 5.0
    grid: int = 101
    out: Optional[str] = None
    trace_csv: Optional[str] = None

    def resolved(self) -> "RunConfig":
        if self.figure is not None:
            preset = FIGURE2_SETS.get(int(self.figure))
            if preset is None:
                raise ConfigError(f"unknown figure set {self.figure}; choose 1, 2 or 3")
            self.p, self.a = -2.0, preset["a"]
            self.y1, self.y2 = list(preset["y1"]), list(preset["y2"])
        if self.subcommand not in SUBCOMMANDS:
            raise ConfigError(f"unknown subcommand {self.subcommand!r}")
        return self


def parse_vector(text) -> list:
    if isinstance(text, (list, tuple)):
        return [float(v) for v in text]
    try:
        return [float(v) for v in str(text).split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated reals, got {text!r}") from exc


def load_config_file(path: str) -> dict:
    data = json.loads(Path(path).read_text())
    if not isinstance(data, dict):
        raise ConfigError("config file must hold a JSON object")
    known = {f.name for f in fields(RunConfig)}
    unknown = sorted(set(data) - known)
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
    return data


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="blaschke-ot", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="subcommand", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--p", type=float, help="power-cost exponent")
    common.add_argument("--dim", type=int)
    common.add_argument("--y1", type=parse_vector)
    common.add_argument("--y2", type=parse_vector)
    common.add_argument("--a", type=float)
    common.add_argument("--samples", type=int)
    common.add_argument("--normals", type=int)
    common.add_argument("--seed", type=int)
    common.add_argument("--tol", type=float)
    common.add_argument("--step", type=float)
    common.add_argument("--out")
    common.add_argument("--trace-csv", dest="trace_csv")
    common.add_argument("--config", help="JSON file; its keys override flags")

    sub.add_parser("mtw-audit", parents=[common], help="classify a power cost by the MTW tensor")
    s = sub.add_parser("sublevel", parents=[common], help="trace and classify a cost sub-level set")
    s.add_argument("--figure", type=int, choices=sorted(FIGURE2_SETS))
    r = sub.add_parser("roll", parents=[common], help="rolling-ball verdicts")
    r.add_argument("--mode", choices=("blaschke", "sweep", "theorem2"))
    r.add_argument("--inner")
    r.add_argument("--outer")
    r.add_argument("--contact", type=parse_vector)
    r.add_argument("--scale", type=float)
    r.add_argument("--sweep-count", dest="sweep_count", type=int)
    r.add_argument("--disk-radius", dest="disk_radius", type=float)
    r.add_argument("--figure", type=int, choices=sorted(FIGURE2_SETS))
    f = sub.add_parser("reflector", parents=[common], help="paraboloid inclusion comparison")
    f.add_argument("--sigma1", type=float)
    f.add_argument("--sigma2", type=float)
    f.add_argument("--z2", type=parse_vector)
    f.add_argument("--z2-last", dest="z2_last", type=float)
    f.add_argument("--contact-x", dest="contact_x", type=parse_vector)
    f.add_argument("--half-width", dest="half_width", type=float)
    f.add_argument("--grid", type=int)
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig(subcommand=args.subcommand)
    for f in fields(RunConfig):
        val = getattr(args, f.name, None)
        if val is not None and f.name != "subcommand":
            setattr(cfg, f.name, val)
    if getattr(args, "config", None):
        for k, v in load_config_file(args.config).items():
            setattr(cfg, k, v)
    return cfg.resolved()


# --- subcommand bodies ------------------------------------------------------


def run_mtw_audit(cfg: RunConfig):
    model = power_cost(cfg.p, cfg.dim)
    report = audit_grid(model, SamplerConfig(cfg.box, cfg.p_min, cfg.p_max), cfg.samples, cfg.seed, cfg.tol)
    return report.to_dict(), (2 if report.classification == VIOLATED else 0)


def write_polyline_csv(path, curve: Polyline2D) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        for x, y in curve.points:
            w.writerow([repr(float(x)), repr(float(y))])


def read_polyline_csv(path, closed: bool = True) -> Polyline2D:
    with open(path, newline="") as fh:
        pts = [[float(v) for v in row] for row in csv.reader(fh) if row]
    return Polyline2D(np.array(pts), closed=closed)


def run_sublevel(cfg: RunConfig):
    model = power_cost(cfg.p, cfg.dim)
    spec = SublevelSpec(model, cfg.y1, cfg.y2, cfg.a)
    box = (np.full(cfg.dim, -cfg.box), np.full(cfg.dim, cfg.box))
    result = {"p": cfg.p, "y1": list(cfg.y1), "y2": list(cfg.y2), "a": cfg.a, "warnings": []}
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", UnboundedLevelSetWarning)
        surface = build_sublevel_psi(spec, box=box)
    result["warnings"] += [str(w.message) for w in caught]
    result["orientation"] = surface.orientation
    result["bounded"] = surface.meta["bounded"]

    if cfg.dim == 2:
        curve = trace_level_curve_2d(surface, find_seed_2d(surface), step=cfg.step, box=_trace_box(surface, box))
        pts = curve.points
        trace = {"closed": curve.closed, "n_points": len(curve), "max_abs_psi": float(np.max(np.abs(surface.psi(pts))))}
        if curve.closed:
            v = polyline_convexity(curve)
            trace.update(convex=v.convex, witness=v.witness, turning=v.turning)
        if cfg.trace_csv:
            write_polyline_csv(cfg.trace_csv, curve)
            trace["csv"] = cfg.trace_csv
        result["trace"] = trace
    else:
        W = random_unit_vectors(np.random.default_rng(cfg.seed), cfg.normals, cfg.dim)
        pts = gauss_inverse_many(surface, W)
    hmins = np.array([tangential_hessian_min(surface, x) for x in pts])
    result["tangential_hessian_min"] = float(hmins.min())
    result["min_curvature"] = float(min_curvature_along(surface, pts).min())
    affine = bool(np.max(np.abs(hmins)) <= 1e-10)
    if affine:
        result["warnings"].append("affine level set: zero curvature")
    result["convex"] = bool(surface.meta["bounded"] and hmins.min() >= -1e-9 and result.get("trace", {}).get("convex", True))
    return result, 0


def make_shape(text: str, cfg: RunConfig):
    kind, _, rest = text.partition(":")
    params, _, at = rest.partition("@")
    nums = parse_vector(params) if params else []
    center = parse_vector(at) if at else [0.0] * cfg.dim
    if kind == "circle":
        return sphere(center, nums[0] if nums else 1.0)
    if kind == "ellipse":
        return ellipsoid(center, nums)
    if kind == "perturbed":
        seed = int(nums[0]) if nums else cfg.seed
        radius = nums[1] if len(nums) > 1 else 1.0
        return random_convex_curve(seed, radius).translated(center)
    if kind == "sublevel":
        return build_sublevel_psi(SublevelSpec(power_cost(cfg.p, cfg.dim), cfg.y1, cfg.y2, cfg.a))
    raise ConfigError(f"unknown shape {text!r}; use circle, ellipse, perturbed or sublevel")


def run_roll(cfg: RunConfig):
    w = np.asarray(cfg.contact, dtype=float)
    w = w / np.linalg.norm(w)
    if cfg.mode == "blaschke":
        v = blaschke_verdict(make_shape(cfg.inner, cfg), make_shape(cfg.outer, cfg), w, cfg.normals, cfg.samples, cfg.seed)
        return v.to_dict(), (2 if v.finding else 0)
    if cfg.mode == "sweep":
        rows, findings = [], 0
        for s in range(cfg.seed, cfg.seed + cfg.sweep_count):
            curve = random_convex_curve(s)
            v = blaschke_verdict(curve, curve.scaled(cfg.scale), w, cfg.normals, cfg.samples, s)
            findings += v.finding
            rows.append({"seed": s, **{k: getattr(v, k) for k in ("dominance_holds", "dominance_margin", "inclusion_holds", "max_violation")}})
        return {"cases": rows, "findings": findings}, (2 if findings else 0)
    if cfg.mode == "theorem2":
        model = power_cost(cfg.p, cfg.dim)
        N = build_sublevel_psi(SublevelSpec(model, cfg.y1, cfg.y2, cfg.a))
        U = disk_tangent_inside(N, w, cfg.disk_radius)
        tc = Theorem2Config(n_normals=cfg.normals, n_samples=cfg.samples, seed=cfg.seed, step=cfg.step)
        v = theorem2_pipeline(model, U, cfg.y1, cfg.y2, w, tc)
        return v.to_dict(), (2 if v.finding else 0)
    raise ConfigError(f"unknown roll mode {cfg.mode!r}")


def run_reflector(cfg: RunConfig):
    par2 = Paraboloid(cfg.sigma2, cfg.z2, cfg.z2_last)
    par1 = align_paraboloid_tangency(cfg.sigma1, par2, cfg.contact_x)
    v = reflector_inclusion(par1, par2, cfg.contact_x, cfg.half_width, cfg.grid)
    return {"par1": par1.to_dict(), "par2": par2.to_dict(), **v.to_dict()}, (0 if v.consistent else 2)


RUNNERS = {
    "mtw-audit": run_mtw_audit,
    "sublevel": run_sublevel,
    "roll": run_roll,
    "reflector": run_reflector,
}


def _jsonable(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    raise TypeError(f"not serializable: {type(obj).__name__}")


def envelope(cfg: RunConfig, result: dict, timing_ms: int) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "tool_version": __version__,
        "subcommand": cfg.subcommand,
        "config_echo": asdict(cfg),
        "result": result,
        "timing_ms": timing_ms,
    }


def dumps(doc: dict) -> str:
    return json.dumps(doc, sort_keys=True, indent=2, default=_jsonable) + "\n"


def execute(cfg: RunConfig):
    """Run one subcommand and return ``(envelope, exit_code)``."""
    t0 = time.perf_counter()
    try:
        result, code = RUNNERS[cfg.subcommand](cfg)
    except (GeometryError, ValueError) as exc:
        result, code = {"error": type(exc).__name__, "message": str(exc)}, 1
    return envelope(cfg, result, int(1000 * (time.perf_counter() - t0))), code


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # usage errors exit 1; status 2 is reserved for findings
        return 1 if exc.code == 2 else (exc.code or 0)
    try:
        cfg = config_from_args(args)
    except (ConfigError, OSError, json.JSONDecodeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    doc, code = execute(cfg)
    text = dumps(doc)
    if cfg.out:
        Path(cfg.out).write_text(text)
    else:
        sys.stdout.write(text)
    if code == 1:
        print(f"error: {doc['result'].get('message')}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
