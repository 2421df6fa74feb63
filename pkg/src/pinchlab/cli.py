"""Command-line front end.

Usage::

    pinchlab catalog [--space euclidean|spherical] [--json]
    pinchlab analyze --config run.toml [--out DIR]
    pinchlab sweep --config run.toml [--out DIR]

Exit codes: 0 all checks pass, 1 an inequality or class check failed,
2 configuration error, 3 numerical failure.

Configuration file (TOML; every key optional unless noted, unknown keys
are rejected)::

    seed = 0                       # shuffle seed of the Welzl solver

    [shape]
    name = "ellipsoid"             # required; see `pinchlab catalog`
    semiaxes = [2.0, 1.0, 1.0]     # shape parameters as listed by the catalog
    # name = "point_cloud"; path = "pts.csv"; delta = 1.0   (radius only)

    [grid]
    nodes = 64                     # polar nodes (azimuth uses 2*nodes), >= 8
    level = 0                      # refinement level, nodes * 2**level
    rule = "gauss-legendre"

    [analysis]
    k = 2
    p = 1.0
    normalize = true
    epsilon = 0.1                  # default: 5 x grid spacing
    theta = 0.5

    [sweep]                        # used by `sweep` only
    parameter = "shape.amplitude"  # or analysis.p, grid.nodes, ...
    values = [0.2, 0.1, 0.05, 0.025]

    [output]
    dir = "out"
    formats = ["json", "csv"]
    per_sample = false             # also write per-sample CSV
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import logging
import os
import sys
from contextlib import nullcontext
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__
from .analysis import AnalysisConfig, _jsonable, analyze, quasi_isometry_report
from .enclosing import miniball
from .errors import (
    ClassViolation,
    ConfigError,
    DegenerateError,
    DomainError,
    HemisphereError,
    ImmersionError,
    ParseError,
    PinchlabError,
    SolverError,
)
from .shapes import CATALOG, GridSpec, ingest_point_cloud, make_shape, sample_shape
from .spaceform import SpaceForm

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

log = logging.getLogger("pinchlab")

EXIT_OK, EXIT_CHECK, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3
THREADS_ENV = "PINCHLAB_THREADS"

_SECTIONS = {
    "shape": None,
    "grid": {"nodes", "level", "rule"},
    "analysis": {"k", "p", "normalize", "epsilon", "theta"},
    "sweep": {"parameter", "values"},
    "output": {"dir", "formats", "per_sample"},
}
_TOP_LEVEL = {"seed"} | set(_SECTIONS)
_FORMATS = {"json", "csv"}


@dataclass
class RunConfig:
    shape: dict
    grid: GridSpec = GridSpec()
    analysis: AnalysisConfig = AnalysisConfig()
    sweep_parameter: Optional[str] = None
    sweep_values: Optional[list] = None
    out_dir: str = "out"
    formats: tuple = ("json", "csv")
    per_sample: bool = False
    seed: int = 0
    raw: dict = field(default_factory=dict)

    @property
    def digest(self) -> str:
        blob = json.dumps(self.raw, sort_keys=True, separators=(",", ":")).encode()
        return hashlib.sha256(blob).hexdigest()


def parse_config(raw: dict) -> RunConfig:
    """Validate a parsed TOML document and build a :class:`RunConfig`."""
    unknown = set(raw) - _TOP_LEVEL
    if unknown:
        raise ConfigError(f"unknown top-level keys: {', '.join(sorted(unknown))}")
    for sec, allowed in _SECTIONS.items():
        if sec in raw and not isinstance(raw[sec], dict):
            raise ConfigError(f"[{sec}] must be a table")
        if allowed is not None and sec in raw:
            bad = set(raw[sec]) - allowed
            if bad:
                raise ConfigError(f"unknown keys in [{sec}]: {', '.join(sorted(bad))}")
    shape = dict(raw.get("shape", {}))
    if "name" not in shape:
        raise ConfigError("[shape] needs a name")
    try:
        grid = GridSpec(**raw.get("grid", {}))
        analysis = AnalysisConfig(**raw.get("analysis", {}))
    except (DomainError, TypeError) as exc:
        raise ConfigError(str(exc)) from None
    sweep = raw.get("sweep", {})
    values = sweep.get("values")
    if values is not None and not isinstance(values, list):
        raise ConfigError("[sweep] values must be a list")
    out = raw.get("output", {})
    formats = tuple(out.get("formats", ("json", "csv")))
    if not set(formats) <= _FORMATS:
        raise ConfigError(f"output formats must be among {sorted(_FORMATS)}")
    seed = raw.get("seed", 0)
    if not isinstance(seed, int) or isinstance(seed, bool):
        raise ConfigError("seed must be an integer")
    return RunConfig(
        shape=shape,
        grid=grid,
        analysis=analysis,
        sweep_parameter=sweep.get("parameter"),
        sweep_values=values,
        out_dir=str(out.get("dir", "out")),
        formats=formats,
        per_sample=bool(out.get("per_sample", False)),
        seed=seed,
        raw=raw,
    )


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        with path.open("rb") as fh:
            raw = tomllib.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    return parse_config(raw)


def build_shape(spec: dict):
    params = {k: v for k, v in spec.items() if k != "name"}
    name = spec["name"]
    entry = CATALOG.get(name)
    if entry is not None and entry.space == "euclidean" and "delta" in params:
        if params.pop("delta") != 0:
            raise ConfigError(f"{name} lives in Euclidean space; delta must be 0")
    try:
        return make_shape(name, **params)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None
    except DomainError as exc:
        raise ConfigError(str(exc)) from None


def _header(cfg: RunConfig) -> dict:
    return {
        "tool": "pinchlab",
        "version": __version__,
        "config_hash": cfg.digest,
        "grid_level": cfg.grid.level,
        "seed": cfg.seed,
    }


def run_analysis(cfg: RunConfig) -> dict:
    """Analyze the configured shape; returns the JSON-ready report."""
    if cfg.shape["name"] == "point_cloud":
        return _run_point_cloud(cfg)
    shape = build_shape(cfg.shape)
    try:
        cfg.analysis.validate_for(shape.n)
    except DomainError as exc:
        raise ConfigError(str(exc)) from None
    surface = sample_shape(shape, cfg.grid)
    report = analyze(surface, cfg.analysis, seed=cfg.seed)
    body = report.to_dict()
    body["passed"] = report.passed
    body["failed_checks"] = report.failed_checks()
    out = _header(cfg)
    out["report"] = body
    return out


def _run_point_cloud(cfg: RunConfig) -> dict:
    spec = dict(cfg.shape)
    bad = set(spec) - {"name", "path", "delta"}
    if bad or "path" not in spec:
        raise ConfigError("point_cloud takes 'path' and optional 'delta'")
    delta = float(spec.get("delta", 0.0))
    pts = ingest_point_cloud(spec["path"], delta=delta)
    dim = pts.shape[1] - (1 if delta > 0 else 0)
    space = SpaceForm(delta, dim)
    ball = miniball(space, pts, seed=cfg.seed)
    out = _header(cfg)
    out["report"] = {
        "shape": {"name": "point_cloud", "path": str(spec["path"]), "points": int(len(pts))},
        "delta": delta,
        "radius": ball.radius,
        "center": ball.center.tolist(),
        "support": list(ball.support),
        "passed": True,
        "failed_checks": [],
    }
    return _jsonable(out)


def flatten(d: dict, prefix: str = "") -> dict:
    """Flatten nested dicts/lists to dotted keys."""
    flat = {}
    for k, v in d.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            flat.update(flatten(v, key + "."))
        elif isinstance(v, list) and v and isinstance(v[0], dict):
            for i, item in enumerate(v):
                flat.update(flatten(item, f"{key}.{i}."))
        elif isinstance(v, list):
            flat[key] = json.dumps(v)
        else:
            flat[key] = v
    return flat


def _checks_by_name(report: dict) -> dict:
    return {c["name"]: c for c in report.get("checks", [])}


def _to_csv(rows: list, columns: list) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=columns, lineterminator="\r\n", extrasaction="ignore")
    w.writeheader()
    for row in rows:
        w.writerow({k: ("" if row.get(k) is None else row.get(k)) for k in columns})
    return buf.getvalue()


def _dump_json(obj) -> str:
    return json.dumps(obj, indent=2, allow_nan=False) + "\n"


def write_report(result: dict, cfg: RunConfig, out_dir: Path) -> list:
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    if "json" in cfg.formats:
        path = out_dir / "report.json"
        path.write_text(_dump_json(result))
        written.append(path)
    if "csv" in cfg.formats:
        flat = flatten(result)
        path = out_dir / "report.csv"
        path.write_text(_to_csv([flat], list(flat)))
        written.append(path)
    return written


def write_per_sample(cfg: RunConfig, out_dir: Path) -> Path:
    """Per-sample radial and distortion data for external plotting."""
    from .analysis import normalize_to_unit_volume, pinching_fields
    from .curvature import compute_curvature
    from .enclosing import extrinsic_radius

    shape = build_shape(cfg.shape)
    surface = sample_shape(shape, cfg.grid)
    ball, surf = extrinsic_radius(surface, seed=cfg.seed)
    if cfg.analysis.normalize:
        surf, ball, _ = normalize_to_unit_volume(surf, ball)
    curv = compute_curvature(surf)
    phi, psi = pinching_fields(surf, ball.radius)
    qi = quasi_isometry_report(surf, ball, cfg.analysis.theta)
    cols = [f"u{i}" for i in range(surf.n)] + ["weight", "r", "phi", "psi", "distortion", "bound"]
    cols += [f"H{j}" for j in range(1, surf.n + 1)]
    data = np.column_stack([surf.params, surf.weights, surf.r, phi, psi, qi.distortion, qi.bound, curv.H[:, 1 : surf.n + 1]])
    rows = [dict(zip(cols, map(repr, map(float, row)))) for row in data]
    path = out_dir / "samples.csv"
    path.write_text(_to_csv(rows, cols))
    return path


def resolve_parameter(cfg: RunConfig, name: str) -> tuple:
    """Map a sweep parameter name to ``(section, key)``."""
    if "." in name:
        sec, key = name.split(".", 1)
    else:
        hits = []
        if name in cfg.shape or name in CATALOG.get(cfg.shape["name"], CATALOG["round_sphere"]).params:
            hits.append("shape")
        if name in _SECTIONS["analysis"]:
            hits.append("analysis")
        if name in _SECTIONS["grid"]:
            hits.append("grid")
        if len(hits) != 1:
            raise ConfigError(f"cannot resolve sweep parameter {name!r}; use section.key")
        sec, key = hits[0], name
    if sec not in ("shape", "analysis", "grid"):
        raise ConfigError(f"cannot sweep over section {sec!r}")
    if sec != "shape" and key not in _SECTIONS[sec]:
        raise ConfigError(f"unknown parameter {sec}.{key}")
    return sec, key


def with_parameter(cfg: RunConfig, sec: str, key: str, value) -> RunConfig:
    try:
        if sec == "shape":
            shape = dict(cfg.shape)
            shape[key] = value
            return replace(cfg, shape=shape)
        if sec == "analysis":
            return replace(cfg, analysis=replace(cfg.analysis, **{key: value}))
        return replace(cfg, grid=replace(cfg.grid, **{key: value}))
    except (DomainError, TypeError) as exc:
        raise ConfigError(str(exc)) from None


SWEEP_COLUMNS = [
    "parameter", "value", "status", "exit_code", "error", "failed_checks",
    "C", "phi_sq", "psi_sq", "phi_bound_ok", "psi_bound_ok", "hausdorff", "annulus_ok", "covering_ok",
    "max_distortion", "distortion_bound_violations", "deficit_p", "deficit_inf", "deficit_mean",
    "radius", "volume_original", "Hk_norm_2p",
]


def run_sweep(cfg: RunConfig):
    """Run the analysis once per sweep value; returns ``(rows, exit_code)``."""
    if not cfg.sweep_parameter:
        raise ConfigError("[sweep] parameter missing")
    if not cfg.sweep_values:
        raise ConfigError("[sweep] values must be a non-empty list")
    sec, key = resolve_parameter(cfg, cfg.sweep_parameter)
    rows = []
    worst = EXIT_OK
    for value in cfg.sweep_values:
        row = {"parameter": f"{sec}.{key}", "value": value}
        try:
            result = run_analysis(with_parameter(cfg, sec, key, value))
        except ConfigError as exc:
            row.update(status="config_error", exit_code=EXIT_CONFIG, error=str(exc))
        except (ClassViolation, HemisphereError) as exc:
            row.update(status="check_failed", exit_code=EXIT_CHECK, error=str(exc))
        except (PinchlabError, np.linalg.LinAlgError, FloatingPointError) as exc:
            row.update(status="numerical_failure", exit_code=EXIT_NUMERIC, error=str(exc))
        else:
            rep = result["report"]
            code = EXIT_OK if rep["passed"] else EXIT_CHECK
            pin, prox, qi, b = rep["pinching"], rep["proximity"], rep["quasi_isometry"], rep["bounds"]
            row.update(
                status="ok" if code == EXIT_OK else "check_failed",
                exit_code=code,
                error="",
                failed_checks=";".join(rep["failed_checks"]),
                C=pin["C"],
                phi_sq=pin["phi_sq"],
                psi_sq=pin["psi_sq"],
                phi_bound_ok=pin["phi_bound_ok"],
                psi_bound_ok=pin["psi_bound_ok"],
                hausdorff=prox["hausdorff"],
                annulus_ok=prox["annulus_ok"],
                covering_ok=prox["covering_ok"],
                max_distortion=qi["max_distortion"],
                distortion_bound_violations=qi["violations"],
                deficit_p=b["deficit_p"],
                deficit_inf=b["deficit_inf"],
                deficit_mean=b["deficit_mean"],
                radius=rep["radius"],
                volume_original=rep["volume_original"],
                Hk_norm_2p=pin["Hk_norm_2p"],
            )
        worst = max(worst, row["exit_code"])
        rows.append(row)
    return rows, worst


def cmd_catalog(args) -> int:
    entries = {
        name: {"space": e.space, "summary": e.summary, "parameters": e.params,
               "delta": "0" if e.space == "euclidean" else "> 0 (open hemisphere)"}
        for name, e in CATALOG.items()
        if args.space is None or e.space == args.space
    }
    if args.json:
        sys.stdout.write(_dump_json(entries))
        return EXIT_OK
    for name, e in entries.items():
        print(f"{name}  [{e['space']}, delta {e['delta']}]")
        print(f"    {e['summary']}")
        for p, desc in e["parameters"].items():
            print(f"    {p}: {desc}")
    return EXIT_OK


def _out_dir(args, cfg) -> Path:
    return Path(args.out if args.out is not None else cfg.out_dir)


def cmd_analyze(args) -> int:
    cfg = load_config(args.config)
    result = run_analysis(cfg)
    out = _out_dir(args, cfg)
    for path in write_report(result, cfg, out):
        log.info("wrote %s", path)
    if cfg.per_sample and cfg.shape["name"] != "point_cloud":
        log.info("wrote %s", write_per_sample(cfg, out))
    failed = result["report"]["failed_checks"]
    if failed:
        print(f"check failed: {', '.join(failed)}", file=sys.stderr)
        return EXIT_CHECK
    return EXIT_OK


def cmd_sweep(args) -> int:
    cfg = load_config(args.config)
    rows, code = run_sweep(cfg)
    out = _out_dir(args, cfg)
    out.mkdir(parents=True, exist_ok=True)
    path = out / "sweep.csv"
    path.write_text(_to_csv(rows, SWEEP_COLUMNS))
    log.info("wrote %s", path)
    for row in rows:
        if row["exit_code"]:
            print(f"{row['parameter']}={row['value']}: {row['status']} {row.get('error') or row.get('failed_checks')}",
                  file=sys.stderr)
    return code


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pinchlab", description="Extrinsic radius and pinching diagnostics for hypersurfaces.")
    parser.add_argument("-v", "--verbose", action="store_true")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("catalog", help="list available shapes")
    p.add_argument("--space", choices=["euclidean", "spherical"])
    p.add_argument("--json", action="store_true", help="machine-readable schema")
    p.set_defaults(func=cmd_catalog)

    for name, func, helptext in (
        ("analyze", cmd_analyze, "analyze one configured shape"),
        ("sweep", cmd_sweep, "analyze along a parameter sweep"),
    ):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--config", required=True, help="TOML run configuration")
        p.add_argument("--out", help="output directory (overrides [output] dir)")
        p.set_defaults(func=func)
    return parser


def _thread_limit():
    value = os.environ.get(THREADS_ENV)
    if not value:
        return nullcontext()
    try:
        n = int(value)
    except ValueError:
        raise ConfigError(f"{THREADS_ENV} must be an integer") from None
    from threadpoolctl import threadpool_limits

    return threadpool_limits(limits=n)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        with _thread_limit():
            return args.func(args)
    except (ConfigError, ParseError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ClassViolation, HemisphereError) as exc:
        print(f"check failed: {exc}", file=sys.stderr)
        return EXIT_CHECK
    except (ImmersionError, DegenerateError, SolverError, DomainError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
