"""``qsync`` command line.

Exit codes: 0 success, 1 invalid input, 2 oracle verification failure,
3 I/O error. Parameters merge as defaults < ``--config`` file < flags.
"""
from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .bath import BathParams
from .dynamics import DEFAULT_ORACLE_CASES, PLUS_STATE, InitialState, evolve_arrays, h_values, verify_oracle
from .errors import QsyncError, ValidationError
from .export import HASH_ALGORITHM, format_float17, write_long_csv, write_matrix, write_metadata, write_table
from .phasespace import q_values, s_values
from .sweep import AxisSpec, PRESETS, SweepGrid, figure_preset, run_sweep

EXIT_OK, EXIT_INVALID, EXIT_VERIFY, EXIT_IO = 0, 1, 2, 3
ORACLE_TOL = 1e-5

CONFIG_KEYS = {
    "gamma": float, "lambda": float, "delta": float, "t": float, "tmax": float, "dt": float,
    "ntheta": int, "nphi": int, "jobs": int, "initial": str, "observable": str, "out": str, "format": str,
}
DEFAULTS = {"gamma": 1.0, "ntheta": 91, "nphi": 181, "jobs": 1, "out": "-", "format": "long"}
COMMAND_DEFAULTS = {
    "evolve": {"tmax": 10.0, "dt": 0.01},
    "qfunc": {"t": 0.0},
    "sphase": {"t": 0.0},
    "figure": {"out": "."},
    "verify": {"tmax": 50.0, "dt": 1e-3},
}


class CliError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliError(message)


def read_config(path: str) -> dict:
    """Parse flat ``key = value`` lines; ``#`` starts a comment."""
    values = {}
    text = Path(path).read_text(encoding="utf-8")
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValidationError(f"{path}:{lineno}: expected key = value", field="config")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in CONFIG_KEYS:
            raise ValidationError(f"{path}:{lineno}: unknown key {key!r}", field="config")
        try:
            values[key] = CONFIG_KEYS[key](value)
        except ValueError:
            raise ValidationError(f"{path}:{lineno}: bad value for {key}: {value!r}", field=key) from None
    return values


def _merged(args: argparse.Namespace) -> dict:
    merged = dict(DEFAULTS)
    merged.update(COMMAND_DEFAULTS.get(args.command, {}))
    if getattr(args, "config", None):
        merged.update(read_config(args.config))
    for key in CONFIG_KEYS:
        value = getattr(args, key, None)
        if value is not None:
            merged[key] = value
    return merged


def _require(cfg: dict, *keys: str) -> None:
    for key in keys:
        if cfg.get(key) is None:
            raise ValidationError(f"missing required parameter {key}", field=key)


def _bath(cfg: dict) -> BathParams:
    _require(cfg, "lambda", "delta")
    return BathParams.from_mapping(cfg)


def parse_initial(text: str | None) -> InitialState:
    if text is None:
        return PLUS_STATE
    parts = text.split(",")
    if len(parts) != 3:
        raise ValidationError("initial must be rho11,re10,im10", field="initial")
    try:
        rho11, re10, im10 = (float(p) for p in parts)
    except ValueError:
        raise ValidationError(f"initial: cannot parse {text!r}", field="initial") from None
    return InitialState(rho11, complex(re10, im10))


def _uniform(lo: float, hi: float, count: int, name: str) -> np.ndarray:
    if count < 2:
        raise ValidationError(f"{name} must be >= 2", field=name)
    return np.linspace(lo, hi, count)


# --- subcommands ----------------------------------------------------------


def cmd_evolve(args, cfg) -> int:
    params = _bath(cfg)
    initial = parse_initial(cfg.get("initial"))
    tmax, dt = cfg["tmax"], cfg["dt"]
    if not (math.isfinite(tmax) and tmax >= 0):
        raise ValidationError("tmax must be >= 0", field="tmax")
    if not (math.isfinite(dt) and dt > 0):
        raise ValidationError("dt must be > 0", field="dt")
    n = int(round(tmax / dt))
    t = dt * np.arange(n + 1)
    h = h_values(params.lam, params.delta, params.gamma, t)
    rho11, rho10 = evolve_arrays(initial, h)
    rows = np.column_stack([t, h.real, h.imag, np.abs(h), rho11, rho10.real, rho10.imag, np.abs(rho10)])
    header = ("t", "re_h", "im_h", "abs_h", "rho11", "re_rho10", "im_rho10", "abs_rho10")
    write_table(header, rows.tolist(), cfg["out"], fmt=format_float17)
    return EXIT_OK


def _state_at(cfg):
    params = _bath(cfg)
    if cfg["t"] < 0:
        raise ValidationError("t must be >= 0", field="t")
    h = h_values(params.lam, params.delta, params.gamma, cfg["t"])
    return evolve_arrays(parse_initial(cfg.get("initial")), h)


def cmd_qfunc(args, cfg) -> int:
    rho11, rho10 = _state_at(cfg)
    theta = _uniform(0.0, math.pi, cfg["ntheta"], "ntheta")
    phi = _uniform(-math.pi, math.pi, cfg["nphi"], "nphi")
    tt, pp = np.meshgrid(theta, phi, indexing="ij")
    q = q_values(rho11, rho10, tt, pp)
    write_table(("theta", "phi", "q"), np.column_stack([tt.ravel(), pp.ravel(), q.ravel()]).tolist(), cfg["out"])
    return EXIT_OK


def cmd_sphase(args, cfg) -> int:
    _, rho10 = _state_at(cfg)
    phi = _uniform(-math.pi, math.pi, cfg["nphi"], "nphi")
    write_table(("phi", "s"), np.column_stack([phi, s_values(rho10, phi)]).tolist(), cfg["out"])
    return EXIT_OK


def _write_result(result, destination, fmt: str) -> None:
    if fmt == "long":
        write_long_csv(result, destination)
    elif fmt == "matrix":
        write_matrix(result, destination)
    else:
        raise ValidationError(f"format must be long or matrix, got {fmt!r}", field="format")


def cmd_sweep(args, cfg) -> int:
    axes = [AxisSpec.parse(text) for text in (args.axis or [])]
    if not axes:
        raise ValidationError("at least one --axis is required", field="axis")
    _require(cfg, "observable")
    axis_names = {ax.name for ax in axes}
    fixed = {}
    for text in args.fixed or []:
        if "=" not in text:
            raise ValidationError(f"bad --fixed {text!r}; expected name=value", field="fixed")
        key, value = (part.strip() for part in text.split("=", 1))
        try:
            fixed[key] = float(value)
        except ValueError:
            raise ValidationError(f"bad --fixed value {value!r}", field="fixed") from None
    # merged scalars fill parameters that are neither axes nor explicitly fixed
    for key in ("lambda", "delta", "gamma", "t"):
        if key not in axis_names and key not in fixed and cfg.get(key) is not None:
            fixed[key] = cfg[key]
    grid = SweepGrid(axes=axes, fixed=fixed, observable=cfg["observable"], initial=parse_initial(cfg.get("initial")))
    result = run_sweep(grid, jobs=cfg["jobs"])
    _write_result(result, cfg["out"], cfg["format"])
    return EXIT_OK


def cmd_figure(args, cfg) -> int:
    grid = figure_preset(args.id)
    result = run_sweep(grid, jobs=cfg["jobs"])
    out = Path(cfg["out"])
    out.mkdir(parents=True, exist_ok=True)
    _write_result(result, out / f"{args.id}.csv", cfg["format"])
    write_metadata(result, out / f"{args.id}.meta.json")
    print(f"{args.id}: {len(result)} rows, grid hash {result.metadata['grid_hash']}", file=sys.stderr)
    return EXIT_OK


def cmd_verify(args, cfg) -> int:
    checks = verify_oracle(DEFAULT_ORACLE_CASES, t_max=cfg["tmax"], dt=cfg["dt"])
    ok = True
    print(f"{'lambda':>8} {'delta':>6} {'gamma':>6} {'max_err(dt)':>12} {'max_err(dt/2)':>14} {'ratio':>6}")
    for c in checks:
        passed = c.max_error < ORACLE_TOL
        ok &= passed
        print(f"{c.lam:8g} {c.delta:6g} {c.gamma:6g} {c.max_error:12.3e} {c.max_error_half_step:14.3e} "
              f"{c.ratio:6.2f} {'ok' if passed else 'FAIL'}")
    return EXIT_OK if ok else EXIT_VERIFY


# --- parser ---------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="qsync", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version",
                        version=f"qsync {__version__} (grid hash: {HASH_ALGORITHM})")
    sub = parser.add_subparsers(dest="command", metavar="{evolve,qfunc,sphase,sweep,figure,verify}",
                                parser_class=_Parser)

    common = _Parser(add_help=False)
    common.add_argument("--config", help="flat key = value parameter file")

    bath = _Parser(add_help=False)
    bath.add_argument("--lambda", dest="lambda", type=float, help="spectral width (units of gamma0)")
    bath.add_argument("--delta", type=float, help="detuning (units of gamma0)")
    bath.add_argument("--gamma", type=float, help="coupling strength (units of gamma0, default 1)")

    state = _Parser(add_help=False)
    state.add_argument("--initial", help="initial state as rho11,re10,im10 (default: plus state)")
    state.add_argument("--out", help="output file, '-' for stdout (default)")

    p = sub.add_parser("evolve", parents=[common, bath, state], help="amplitude and density-matrix trajectory")
    p.add_argument("--tmax", type=float, help="final time gamma0*t (default 10)")
    p.add_argument("--dt", type=float, help="time step (default 0.01)")
    p.set_defaults(func=cmd_evolve)

    p = sub.add_parser("qfunc", parents=[common, bath, state], help="Husimi Q on a theta x phi grid")
    p.add_argument("--t", type=float, help="time gamma0*t (default 0)")
    p.add_argument("--ntheta", type=int, help="theta samples on [0, pi] (default 91)")
    p.add_argument("--nphi", type=int, help="phi samples on [-pi, pi] (default 181)")
    p.set_defaults(func=cmd_qfunc)

    p = sub.add_parser("sphase", parents=[common, bath, state], help="shifted phase distribution S(phi)")
    p.add_argument("--t", type=float, help="time gamma0*t (default 0)")
    p.add_argument("--nphi", type=int, help="phi samples on [-pi, pi] (default 181)")
    p.set_defaults(func=cmd_sphase)

    p = sub.add_parser("sweep", parents=[common, bath, state], help="evaluate an observable over a grid")
    p.add_argument("--axis", action="append", help="name:min:max:count[:log] (repeatable)")
    p.add_argument("--fixed", action="append", help="name=value (repeatable)")
    p.add_argument("--t", type=float, help="time when t is not an axis")
    p.add_argument("--observable", choices=["abs_rho10", "q", "s", "s_max", "phi_star", "revivals"])
    p.add_argument("--format", choices=["long", "matrix"])
    p.add_argument("--jobs", type=int, help="worker processes (default 1)")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("figure", parents=[common], help="regenerate a figure grid as CSV + metadata")
    p.add_argument("--id", required=True, choices=list(PRESETS), metavar="ID", help=", ".join(PRESETS))
    p.add_argument("--out", help="output directory (default .)")
    p.add_argument("--format", choices=["long", "matrix"])
    p.add_argument("--jobs", type=int, help="worker processes (default 1)")
    p.set_defaults(func=cmd_figure)

    p = sub.add_parser("verify", parents=[common], help="closed form vs Volterra oracle check")
    p.add_argument("--tmax", type=float, help="horizon (default 50)")
    p.add_argument("--dt", type=float, help="solver step (default 1e-3)")
    p.set_defaults(func=cmd_verify)
    return parser


def _flag(field: str | None) -> str:
    return f"--{field}: " if field else ""


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except CliError as exc:
        print(f"qsync: error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    if not getattr(args, "command", None):
        parser.print_help(sys.stderr)
        return EXIT_INVALID
    try:
        cfg = _merged(args)
        if cfg.get("jobs", 1) < 1:
            raise ValidationError("jobs must be >= 1", field="jobs")
        return args.func(args, cfg)
    except ValidationError as exc:
        print(f"qsync: error: {_flag(exc.field)}{exc}", file=sys.stderr)
        return EXIT_INVALID
    except QsyncError as exc:
        print(f"qsync: error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"qsync: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
