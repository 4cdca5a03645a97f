"""
Command-line driver: resolve a run configuration, dispatch to the sweep and
monitor engines, and write a data file plus a metadata sidecar.

Configuration files are flat TOML with dotted keys, for example::

    params.G_B = 1e4
    run.f_E = 0.01
    grid.start = 10
    grid.stop = 200
    grid.points = 20
    grid.scale = "log"

``--set key=value`` applies the same keys on top of the file. The sidecar
written next to every data file is itself a valid ``--config`` input.
"""

import argparse
import csv
import json
import math
import os
import sys
import time
import warnings
from dataclasses import dataclass, field, fields, replace
from importlib import metadata as importlib_metadata

import numpy as np

from . import keyrate, monitor
from .adversary import BoundMethod
from .gaussian_core import InvalidCovarianceError
from .terminals import RegimeWarning, SystemParams

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

THREADS_ENV = "FLQKD_THREADS"

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3

MODES = ("keyrate-sweep", "fe-sweep", "holevo-sweep", "point", "monitor-sim")

# mode -> (grid variable, start, stop, points, scale)
DEFAULT_GRIDS = {
    "keyrate-sweep": ("L_km", 10.0, 200.0, 20, "log"),
    "fe-sweep": ("f_E", 0.0, 0.1, 11, "lin"),
    "holevo-sweep": ("N_S", 1e-4, 1.0, 41, "log"),
}

KEYRATE_COLUMNS = [
    ("L_km", "L"),
    ("f_E", "f_E"),
    ("kappa_S", "kappa_S"),
    ("N_S_opt", "N_S_opt"),
    ("R_opt", "R_opt"),
    ("pr_e", "pr_e"),
    ("I_AB_bps", "I_AB"),
    ("chi_ub_bps", "chi_ub"),
    ("chi_ub_asym_bps", "chi_ub_asym"),
    ("skr_lb_bps", "skr_lb"),
    ("ppb_tx", "ppb_tx"),
    ("ppb_rx", "ppb_rx"),
    ("eff_per_use", "eff_per_use"),
    ("eff_per_mode", "eff_per_mode"),
    ("pirandola_bound", "pirandola_bound"),
    ("leak_ratio", "leak_ratio"),
    ("feasible", "feasible"),
    ("status", "status"),
]


class ConfigError(ValueError):
    pass


class NumericInvariantError(ArithmeticError):
    pass


@dataclass(frozen=True)
class GridSpec:
    start: float
    stop: float
    points: int
    scale: str = "lin"

    def values(self):
        if self.points < 2:
            raise ConfigError("grid.points must be >= 2")
        if self.scale == "log":
            if self.start <= 0 or self.stop <= 0:
                raise ConfigError("grid.start and grid.stop must be positive for a log grid")
            return [float(x) for x in np.geomspace(self.start, self.stop, self.points)]
        if self.scale == "lin":
            return [float(x) for x in np.linspace(self.start, self.stop, self.points)]
        raise ConfigError(f"grid.scale must be 'lin' or 'log', got {self.scale!r}")


@dataclass(frozen=True)
class RunConfig:
    mode: str
    params: SystemParams = field(default_factory=SystemParams)
    grid: GridSpec = None
    f_E: float = 0.01
    L: float = 50.0
    r_candidates: tuple = ()
    fold_leak: bool = False
    seed: int = 0
    idler_counts: float = 1e6
    out: str = None
    fmt: str = "csv"
    threads: int = 1
    events_out: str = None


def _parse_value(text):
    try:
        return tomllib.loads(f"v = {text}")["v"]
    except tomllib.TOMLDecodeError:
        return text


def _flatten(d, prefix=""):
    out = {}
    for k, v in d.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            out.update(_flatten(v, key + "."))
        else:
            out[key] = v
    return out


def _as_number(key, value, kind):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{key}: expected a number, got {value!r}")
    if kind is int:
        if float(value) != int(value):
            raise ConfigError(f"{key}: expected an integer, got {value!r}")
        return int(value)
    return float(value)


_PARAM_FIELDS = {f.name for f in fields(SystemParams)}
_RUN_KEYS = {
    "f_E": float, "L": float, "fold_leak": bool, "seed": int,
    "idler_counts": float, "r_candidates": list, "mode": str,
}
_GRID_KEYS = {"start": float, "stop": float, "points": int, "scale": str}


def resolve_config(mode, flat, out=None, fmt="csv", threads=1, seed=None, events_out=None):
    """Build a validated ``RunConfig`` from flat dotted keys.

    Unknown keys, wrong types and parameter-invariant violations raise
    ``ConfigError`` naming the offending key.
    """
    if mode not in MODES:
        raise ConfigError(f"unknown mode {mode!r}")
    param_overrides, run, grid = {}, {}, {}
    for key, value in flat.items():
        section, _, name = key.partition(".")
        if section == "meta":
            continue
        if section == "params" and name in _PARAM_FIELDS:
            if name == "kappa_S_override" and value in ("none", "None", ""):
                param_overrides[name] = None
            else:
                param_overrides[name] = _as_number(key, value, float)
        elif section == "run" and name in _RUN_KEYS:
            run[name] = value
        elif section == "grid" and name in _GRID_KEYS:
            grid[name] = value
        else:
            raise ConfigError(f"{key}: unknown configuration key")

    try:
        params = SystemParams(**param_overrides)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"params: {exc}") from None

    cfg_mode = run.pop("mode", mode)
    if cfg_mode != mode:
        raise ConfigError(f"run.mode: config is for {cfg_mode!r}, not {mode!r}")

    kwargs = {}
    for name, value in run.items():
        kind = _RUN_KEYS[name]
        key = f"run.{name}"
        if kind is bool:
            if not isinstance(value, bool):
                raise ConfigError(f"{key}: expected true or false, got {value!r}")
            kwargs[name] = value
        elif kind is list:
            if not isinstance(value, list):
                raise ConfigError(f"{key}: expected a list of bit rates, got {value!r}")
            kwargs[name] = tuple(_as_number(key, v, float) for v in value)
        else:
            kwargs[name] = _as_number(key, value, kind)

    if seed is not None:
        kwargs["seed"] = seed
    if kwargs.get("seed", 0) < 0:
        raise ConfigError("run.seed: must be nonnegative")
    if not 0 <= kwargs.get("f_E", 0.01) <= 1:
        raise ConfigError("run.f_E: must lie in [0, 1]")
    if kwargs.get("L", 50.0) <= 0:
        raise ConfigError("run.L: must be positive")
    if kwargs.get("idler_counts", 1e6) <= 0:
        raise ConfigError("run.idler_counts: must be positive")

    grid_spec = None
    if mode in DEFAULT_GRIDS:
        _, start, stop, points, scale = DEFAULT_GRIDS[mode]
        g = {"start": start, "stop": stop, "points": points, "scale": scale}
        for name, value in grid.items():
            kind = _GRID_KEYS[name]
            if kind is str:
                if not isinstance(value, str):
                    raise ConfigError(f"grid.{name}: expected a string, got {value!r}")
                g[name] = value
            else:
                g[name] = _as_number(f"grid.{name}", value, kind)
        grid_spec = GridSpec(**g)
        grid_spec.values()
        if mode == "keyrate-sweep" and min(grid_spec.start, grid_spec.stop) <= 0:
            raise ConfigError("grid.start: path lengths must be positive")
        if mode == "fe-sweep" and not 0 <= min(grid_spec.start, grid_spec.stop) <= max(
                grid_spec.start, grid_spec.stop) <= 1:
            raise ConfigError("grid.start: f_E values must lie in [0, 1]")
    elif grid:
        raise ConfigError(f"grid.{next(iter(grid))}: mode {mode!r} takes no grid")

    if fmt not in ("csv", "jsonl"):
        raise ConfigError(f"format must be csv or jsonl, got {fmt!r}")
    if threads < 1:
        raise ConfigError("threads must be >= 1")
    return RunConfig(mode=mode, params=params, grid=grid_spec, out=out, fmt=fmt,
                     threads=threads, events_out=events_out, **kwargs)


def load_config_file(path):
    try:
        with open(path, "rb") as fh:
            return _flatten(tomllib.load(fh))
    except OSError as exc:
        raise ConfigError(f"cannot read config {path!r}: {exc.strerror}") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from None


def _toml_value(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, str):
        return json.dumps(v)
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_toml_value(x) for x in v) + "]"
    if isinstance(v, float):
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        if math.isnan(v):
            return "nan"
    return repr(v)


def config_items(cfg):
    """Flat dotted keys that reproduce ``cfg`` when fed back through ``--config``."""
    items = {}
    for f in fields(SystemParams):
        v = getattr(cfg.params, f.name)
        items[f"params.{f.name}"] = "none" if v is None else v
    items["run.mode"] = cfg.mode
    for name in ("f_E", "L", "fold_leak", "seed", "idler_counts"):
        items[f"run.{name}"] = getattr(cfg, name)
    if cfg.r_candidates:
        items["run.r_candidates"] = list(cfg.r_candidates)
    if cfg.grid is not None:
        for name in ("start", "stop", "points", "scale"):
            items[f"grid.{name}"] = getattr(cfg.grid, name)
    return items


def _fmt_cell(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _write_rows(path, rows, fmt):
    with open(path, "w", newline="") as fh:
        if fmt == "csv":
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(list(rows[0]))
            for row in rows:
                writer.writerow([_fmt_cell(v) for v in row.values()])
        else:
            for row in rows:
                fh.write(json.dumps(row) + "\n")


def _check_rows(rows):
    for i, row in enumerate(rows):
        for k, v in row.items():
            if isinstance(v, float) and not math.isfinite(v):
                raise NumericInvariantError(f"row {i}: {k} is not finite ({v!r})")
        if "skr_lb_bps" in row:
            if row["skr_lb_bps"] < 0:
                raise NumericInvariantError(f"row {i}: negative key rate")
            if row["skr_lb_bps"] > 0 and row["pr_e"] > keyrate.PR_E_MAX:
                raise NumericInvariantError(f"row {i}: positive key rate above the error cap")
            if row["eff_per_mode"] >= row["pirandola_bound"] and row["skr_lb_bps"] > 0:
                raise NumericInvariantError(f"row {i}: efficiency exceeds the repeaterless bound")


def _point_row(p):
    d = p.as_dict()
    return {col: d[attr] for col, attr in KEYRATE_COLUMNS}


def _opt_kwargs(cfg):
    kw = {"fold_leak": cfg.fold_leak}
    if cfg.r_candidates:
        kw["r_candidates"] = cfg.r_candidates
    return kw


def run(cfg):
    """Compute the rows for ``cfg``; returns ``(rows, extra_metadata)``."""
    extra = {}
    if cfg.mode == "keyrate-sweep":
        sweep = keyrate.distance_sweep(cfg.params, cfg.f_E, cfg.grid.values(),
                                       workers=cfg.threads, **_opt_kwargs(cfg))
        rows = [_point_row(r.point) for r in sweep]
    elif cfg.mode == "fe-sweep":
        sweep = keyrate.fe_sweep(cfg.params, cfg.L, cfg.grid.values(),
                                 workers=cfg.threads, **_opt_kwargs(cfg))
        rows = [_point_row(r.point) for r in sweep]
    elif cfg.mode == "point":
        p = keyrate.optimize_operating_point(cfg.params.replace(L=cfg.L), cfg.f_E,
                                             **_opt_kwargs(cfg))
        rows = [_point_row(p)]
    elif cfg.mode == "holevo-sweep":
        table = keyrate.holevo_sweep(cfg.params, cfg.L, cfg.f_E, cfg.grid.values(),
                                     workers=cfg.threads)
        rows = [{"N_S": r.N_S, "optimum": r.optimum, "passive": r.passive,
                 "active": r.active, "C_E": r.C_E, "optimum_capped": r.optimum_capped,
                 "passive_capped": r.passive_capped, "active_capped": r.active_capped}
                for r in table]
        extra["thresholds"] = dict(keyrate.HOLEVO_THRESHOLDS)
    else:
        duration = monitor.duration_for_idler_counts(cfg.params, cfg.idler_counts)
        streams = monitor.simulate_streams(cfg.params, cfg.f_E, duration, cfg.seed)
        rates = monitor.rates_from_streams(streams, cfg.params, duration)
        expected = monitor.expected_rates(cfg.params, cfg.f_E)
        row = {"f_E": cfg.f_E, "seed": cfg.seed}
        row.update(rates.as_dict())
        row["S_B_expected"] = expected.S_B
        row["f_E_hat_expected"] = expected.f_E_hat
        rows = [row]
        if cfg.events_out:
            monitor.write_events(streams, cfg.events_out)
    return rows, extra


def _metadata(cfg, extra, wall):
    try:
        version = importlib_metadata.version("artifact")
    except importlib_metadata.PackageNotFoundError:
        version = "unknown"
    meta = {
        "meta.engine_version": version,
        "meta.bound_method": BoundMethod.EXACT.value,
        "meta.asymptotic_column": BoundMethod.ASYMPTOTIC_KAPPA_S.value,
        "meta.wall_clock_s": round(wall, 3),
    }
    for k, v in extra.get("thresholds", keyrate.HOLEVO_THRESHOLDS).items():
        meta[f"meta.thresholds.{k}"] = v
    return meta


def write_sidecar(path, cfg, extra, wall):
    lines = [f"{k} = {_toml_value(v)}" for k, v in config_items(cfg).items()]
    lines += [f"{k} = {_toml_value(v)}" for k, v in _metadata(cfg, extra, wall).items()]
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def _default_threads():
    raw = os.environ.get(THREADS_ENV, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def build_parser():
    parser = argparse.ArgumentParser(
        prog="flqkd",
        description="Floodlight QKD key-rate, Holevo-bound and channel-monitor tables.",
    )
    sub = parser.add_subparsers(dest="mode", required=True)
    for mode in MODES:
        p = sub.add_parser(mode)
        p.add_argument("--config", help="flat dotted-key TOML file")
        p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                       help="override one key, e.g. params.G_B=1e5 (repeatable)")
        p.add_argument("--out", help="data file (default: <mode>.<format>)")
        p.add_argument("--format", choices=("csv", "jsonl"), default="csv")
        p.add_argument("--seed", type=int, help="RNG seed for monitor-sim")
        p.add_argument("--threads", type=int, default=None,
                       help=f"worker processes (default ${THREADS_ENV} or 1)")
        if mode == "monitor-sim":
            p.add_argument("--events", help="also write 'detector timestamp_ps' lines here")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        flat = load_config_file(args.config) if args.config else {}
        for item in args.set:
            key, sep, value = item.partition("=")
            if not sep:
                raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
            flat[key.strip()] = _parse_value(value.strip())
        threads = args.threads if args.threads is not None else _default_threads()
        out = args.out or f"{args.mode}.{args.format}"
        cfg = resolve_config(args.mode, flat, out=out, fmt=args.format, threads=threads,
                             seed=args.seed, events_out=getattr(args, "events", None))
    except ConfigError as exc:
        print(f"flqkd: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    t0 = time.perf_counter()
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RegimeWarning)
            rows, extra = run(cfg)
        _check_rows(rows)
    except (NumericInvariantError, InvalidCovarianceError, ArithmeticError) as exc:
        print(f"flqkd: numeric invariant violated: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (monitor.MonitorRegimeError, ValueError) as exc:
        print(f"flqkd: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    _write_rows(cfg.out, rows, cfg.fmt)
    write_sidecar(cfg.out + ".meta.toml", cfg, extra, time.perf_counter() - t0)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
