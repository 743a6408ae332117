"""Command-line experiment runner.

Every subcommand writes its tables and a JSON summary (with a ``config``
echo block) into ``--out``, plus ``<subcommand>.ini`` which feeds straight
back into ``--config`` to repeat the run.  Values resolve as CLI flag, then
config file, then built-in default.

Exit codes: 0 success, 2 usage error, 3 validation error, 4 solver failure.
Errors are reported as one JSON line on stderr.
"""
from __future__ import annotations

import argparse
import configparser
import json
import sys
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np

from . import io
from ._parallel import map_ordered
from .convergence import RateTable, SweepConfig, circular_law_distance, rate_sweep
from .ensemble import EnsembleSpec, parse_distribution, sample_matrix, shift_matrix, \
    smooth_matrix
from .hermitization import shifted_singular_values
from .limit_law import BranchSelectionError, default_grid, density, support_thresholds
from .potential import (AllTrialsExcluded, disc_potential, empirical_potential, limit_potential,
                        smoothed_char, smoothing_radius)
from .spectra import ComplexSpectrum, EigenSolverError, eigenvalues
from .sv_tail import ProfileStructureError, classify_profile, smin_tail_estimate

EXIT_USAGE, EXIT_VALIDATION, EXIT_SOLVER = 2, 3, 4
GLOBAL_SECTION = "circlaw"
_SOLVER_ERRORS = (EigenSolverError, BranchSelectionError, AllTrialsExcluded,
                  np.linalg.LinAlgError)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def parse_complex(text: str) -> complex:
    try:
        return complex(str(text).strip().replace(" ", "").replace("i", "j"))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not a complex number: {text!r}") from exc


def _list_of(conv: Callable) -> Callable[[str], list]:
    def parse(text: str) -> list:
        parts = [p for p in str(text).split(",") if p.strip()]
        if not parts:
            raise argparse.ArgumentTypeError("empty list")
        try:
            return [conv(p.strip()) for p in parts]
        except (ValueError, argparse.ArgumentTypeError) as exc:
            raise argparse.ArgumentTypeError(f"bad list {text!r}: {exc}") from exc
    parse.__name__ = f"list_of_{conv.__name__}"
    return parse


def _radius(text: str):
    if str(text).strip().lower() == "auto":
        return "auto"
    try:
        return float(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"r must be a number or 'auto', got {text!r}") from exc


def _thresholds(text: str):
    if str(text).strip().lower() == "auto":
        return "auto"
    return _list_of(float)(text)


def _range_spec(text: str):
    """``a:b:k`` -> ``k`` evenly spaced values from ``a`` to ``b``."""
    try:
        a, b, k = str(text).split(":")
        return np.linspace(float(a), float(b), int(k)).tolist()
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected start:stop:count, got {text!r}") from exc


def _fmt_config_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, complex):
        return repr(v).strip("()")
    if isinstance(v, (list, tuple)):
        return ",".join(_fmt_config_value(x) for x in v)
    if isinstance(v, float):
        return repr(v)
    return str(v)


def build_parser() -> _Parser:
    common = _Parser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="master seed")
    common.add_argument("--workers", type=int, default=1, help="worker threads")
    common.add_argument("--out", default="circlaw-out", help="output directory")
    common.add_argument("--json", action="store_true", help="print the JSON summary")
    common.add_argument("--config", default=None, help="INI config file")
    common.add_argument("--plot-data", action="store_true", help="also write plot-ready grids")

    ens = _Parser(add_help=False)
    ens.add_argument("--dist", default="gaussian",
                     help="gaussian | rademacher | uniform | twopoint:<atom>")
    ens.add_argument("--p", dest="p_n", type=float, default=1.0, help="sparsity p_n")

    parser = _Parser(prog="circlaw", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", parents=[common, ens], help="sample spectra")
    s.add_argument("--n", type=int, default=128)
    s.add_argument("--z", type=parse_complex, default=0j)
    s.add_argument("--r", type=float, default=0.0, help="smoothing radius")
    s.add_argument("--trials", type=int, default=1)

    s = sub.add_parser("limit", parents=[common], help="solve the limit law")
    s.add_argument("--z", type=parse_complex, default=0j)
    s.add_argument("--grid", type=int, default=2001, help="grid points")
    s.add_argument("--margin", type=float, default=0.5)
    s.add_argument("--v0", type=float, default=1e-6)

    s = sub.add_parser("potential", parents=[common, ens], help="logarithmic potentials")
    s.add_argument("--n", type=int, default=256)
    s.add_argument("--z", type=_list_of(parse_complex), default=[0j, 0.5 + 0j, 1.5 + 0j])
    s.add_argument("--grid-re", type=_range_spec, default=None, help="start:stop:count")
    s.add_argument("--grid-im", type=_range_spec, default=None, help="start:stop:count")
    s.add_argument("--r", type=_radius, default="auto", help="smoothing radius or 'auto'")
    s.add_argument("--trials", type=int, default=20)
    s.add_argument("--xi-draws", type=int, default=1)
    s.add_argument("--truncate", action="store_true")

    s = sub.add_parser("svtail", parents=[common, ens], help="smallest singular value tail")
    s.add_argument("--n", type=int, default=64)
    s.add_argument("--z", type=parse_complex, default=0.5 + 0j)
    s.add_argument("--thresholds", type=_thresholds, default="auto")
    s.add_argument("--trials", type=int, default=500)
    s.add_argument("--profile", action="store_true",
                   help="classify the smallest right singular vector of trial 0")

    s = sub.add_parser("converge", parents=[common, ens], help="distance-vs-n rate sweep")
    s.add_argument("--n", dest="n_list", type=_list_of(int), default=[64, 128, 256])
    s.add_argument("--p-list", type=_list_of(float), default=None,
                   help="sparsity levels; defaults to --p")
    s.add_argument("--z", dest="z_list", type=_list_of(parse_complex), default=[0.5 + 0j])
    s.add_argument("--trials", type=int, default=10)
    s.add_argument("--kind", choices=("sv-vs-limit", "mp", "circular"), default="sv-vs-limit")

    s = sub.add_parser("char", parents=[common, ens], help="characteristic-function check")
    s.add_argument("--n", type=int, default=64)
    s.add_argument("--r", type=float, default=0.3)
    s.add_argument("--t", type=float, default=1.0)
    s.add_argument("--v", type=float, default=1.0)
    s.add_argument("--draws", type=int, default=200)
    return parser


def _subparser(parser: _Parser, name: str) -> _Parser:
    for action in parser._actions:
        if isinstance(action, argparse._SubParsersAction):
            return action.choices[name]
    raise KeyError(name)


def _config_defaults(sub: _Parser, path: str, command: str) -> dict:
    cp = configparser.ConfigParser()
    if not cp.read(path):
        raise UsageError(f"cannot read config file {path!r}")
    actions = {a.dest: a for a in sub._actions if a.dest != "help"}
    values = {}
    for section in (GLOBAL_SECTION, command):
        if not cp.has_section(section):
            continue
        for key, raw in cp.items(section):
            dest = key.replace("-", "_")
            if dest not in actions:
                raise UsageError(f"unknown config key {key!r} in [{section}]")
            act = actions[dest]
            if dest == "config":
                continue
            if isinstance(act, argparse._StoreTrueAction):
                values[dest] = cp.getboolean(section, key)
            elif act.type is not None:
                try:
                    values[dest] = act.type(raw)
                except argparse.ArgumentTypeError as exc:
                    raise UsageError(f"config {key}: {exc}") from exc
            else:
                values[dest] = raw
    return values


def parse_args(argv: Sequence[str]) -> argparse.Namespace:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        sub = _subparser(parser, args.command)
        sub.set_defaults(**_config_defaults(sub, args.config, args.command))
        args = parser.parse_args(argv)
    return args


def _config_echo(args: argparse.Namespace) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if k not in ("config", "out")}


class _Output:
    """Writes only plain file names inside one directory."""

    def __init__(self, directory: str):
        self.root = Path(directory).resolve()
        self.root.mkdir(parents=True, exist_ok=True)
        self.written: List[str] = []

    def path(self, name: str) -> Path:
        p = (self.root / name).resolve()
        if p.parent != self.root:
            raise ValueError(f"refusing to write outside {self.root}: {name!r}")
        self.written.append(p.name)
        return p

    def csv(self, name, header, rows):
        io.write_csv(self.path(name), header, rows)

    def json(self, name, obj):
        io.write_json(self.path(name), obj)


def _spec(args, n=None) -> EnsembleSpec:
    return EnsembleSpec(args.n if n is None else n, parse_distribution(args.dist),
                        args.p_n, args.seed)


def cmd_simulate(args, out: _Output) -> dict:
    if args.trials < 1:
        raise ValueError("trials must be >= 1")
    if args.r < 0:
        raise ValueError("r must be non-negative")
    spec = _spec(args)

    def one(t):
        M = sample_matrix(spec, t)
        B = smooth_matrix(M, args.z, args.r, args.seed, t)
        lam = eigenvalues(B, z_shift=args.z, r_smooth=args.r).values
        s = shifted_singular_values(B, 0.0)
        return lam, s

    res = map_ordered(one, range(args.trials), args.workers)
    out.csv("simulate_spectrum.csv", ("trial", "re", "im"),
            ((t, v.real, v.imag) for t, (lam, _) in enumerate(res) for v in lam))
    out.csv("simulate_sv.csv", ("trial", "s"),
            ((t, v) for t, (_, s) in enumerate(res) for v in s))
    per = []
    for t, (lam, s) in enumerate(res):
        row = {"trial": t, "s_max": float(s[0]), "s_min": float(s[-1])}
        if lam.size >= 8 and args.z == 0 and args.r == 0:
            d = circular_law_distance(ComplexSpectrum(values=lam, n=lam.size))
            row.update(radial_ks=d.radial_ks, angular_ks=d.angular_ks)
        per.append(row)
    return {"n": spec.n, "dist": str(spec.dist), "p_n": spec.p_n, "kappa3": spec.kappa3,
            "trials": per}


def cmd_limit(args, out: _Output) -> dict:
    if args.grid < 3:
        raise ValueError("grid must have at least 3 points")
    sol = density(args.z, default_grid(args.z, args.grid, args.margin), args.v0)
    out.csv("limit.csv", ("x", "density", "cdf"), sol.rows())
    if args.plot_data:
        out.csv("limit_plot.csv", ("x", "y"), zip(sol.x_grid, sol.density))
    x1, x2 = support_thresholds(args.z)
    return {"x1": x1, "x2": x2, "mass": sol.mass, "limit_potential": limit_potential(sol),
            "disc_potential": disc_potential(args.z)}


def cmd_potential(args, out: _Output) -> dict:
    spec = _spec(args)
    r = smoothing_radius(spec.n) if args.r == "auto" else float(args.r)
    if (args.grid_re is None) != (args.grid_im is None):
        raise ValueError("--grid-re and --grid-im go together")
    if args.grid_re is not None:
        points = [complex(a, b) for b in args.grid_im for a in args.grid_re]
    else:
        points = list(args.z)
    rows, diag = [], []
    for z in points:
        est = empirical_potential(spec, z, r=r, trials=args.trials, truncate=args.truncate,
                                  xi_draws=args.xi_draws, workers=args.workers)
        lim = limit_potential(density(z))
        disc = disc_potential(z)
        rows += [(z.real, z.imag, est.value, "Empirical"), (z.real, z.imag, lim, "Limit"),
                 (z.real, z.imag, disc, "DiscClosedForm")]
        diag.append({"z": [z.real, z.imag], **est.diagnostics(),
                     "limit": lim, "disc": disc})
    out.csv("potential.csv", ("re", "im", "U", "kind"), rows)
    if args.plot_data:
        out.csv("potential_plot.csv", ("re", "im", "value"),
                ((a, b, u) for a, b, u, k in rows if k == "Empirical"))
    return {"r": r, "points": diag}


def cmd_svtail(args, out: _Output) -> dict:
    spec = _spec(args)
    n = spec.n
    th = ([1e-4 / n ** 2, 1e-2 / n, 1e-1 / n, 1.0 / n] if args.thresholds == "auto"
          else args.thresholds)
    rep = smin_tail_estimate(spec, args.z, th, args.trials, args.workers)
    out.csv("svtail.csv", ("threshold", "count", "trials", "prob", "cp_lower", "cp_upper"),
            rep.rows())
    summary = rep.summary()
    if args.profile:
        _, _, vh = np.linalg.svd(shift_matrix(sample_matrix(spec, 0), args.z))
        try:
            summary["profile"] = classify_profile(vh[-1].conj(), p_n=spec.p_n).summary()
        except ProfileStructureError as exc:
            summary["profile"] = {"classification": "structure-error", "message": str(exc)}
    return summary


def cmd_converge(args, out: _Output) -> dict:
    cfg = SweepConfig(n_list=args.n_list, p_list=args.p_list or [args.p_n],
                      z_list=args.z_list, trials=args.trials, kind=args.kind,
                      dist=parse_distribution(args.dist), seed=args.seed,
                      workers=args.workers)
    table: RateTable = rate_sweep(cfg)
    out.csv("rates.csv", RateTable.COLUMNS, table.csv_rows())
    if args.plot_data:
        out.csv("rates_plot.csv", ("x", "y"),
                ((r["n"] * r["p_n"], r["mean_distance"]) for r in table.rows))
    return table.summary()


def cmd_char(args, out: _Output) -> dict:
    spec = _spec(args)
    chk = smoothed_char(sample_matrix(spec, 0), args.t, args.v, args.r, args.draws,
                        args.seed, args.workers)
    out.csv("char.csv", ("t", "v", "r", "draws", "re_fn", "im_fn", "re_smoothed",
                         "im_smoothed", "h", "error"),
            [(chk.t, chk.v, chk.r, chk.draws, chk.f_n.real, chk.f_n.imag,
              chk.f_smoothed.real, chk.f_smoothed.imag, chk.h, chk.error)])
    return chk.summary()


COMMANDS: Dict[str, Callable] = {
    "simulate": cmd_simulate, "limit": cmd_limit, "potential": cmd_potential,
    "svtail": cmd_svtail, "converge": cmd_converge, "char": cmd_char,
}


def _write_ini(out: _Output, args: argparse.Namespace) -> None:
    cp = configparser.ConfigParser()
    cp[args.command] = {k.replace("_", "-"): _fmt_config_value(v)
                        for k, v in _config_echo(args).items()
                        if k != "command" and v is not None}
    with out.path(f"{args.command}.ini").open("w") as fh:
        cp.write(fh)


def _fail(code: int, kind: str, message: str) -> int:
    sys.stderr.write(json.dumps({"error": kind, "exit": code, "message": message}) + "\n")
    return code


def run(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = parse_args(argv)
    except UsageError as exc:
        return _fail(EXIT_USAGE, "usage", str(exc))
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    try:
        if args.workers < 1:
            raise ValueError("workers must be >= 1")
        out = _Output(args.out)
        result = COMMANDS[args.command](args, out)
        summary = {"command": args.command, "config": _config_echo(args), "result": result}
        out.json(f"{args.command}.json", summary)
        _write_ini(out, args)
    except _SOLVER_ERRORS as exc:
        return _fail(EXIT_SOLVER, "solver", f"{type(exc).__name__}: {exc}")
    except (ValueError, OverflowError) as exc:
        return _fail(EXIT_VALIDATION, "validation", f"{type(exc).__name__}: {exc}")
    if args.json:
        sys.stdout.write(io.dumps(summary) + "\n")
    else:
        sys.stdout.write(f"{args.command}: wrote {', '.join(out.written)} to {out.root}\n")
    return 0


def main() -> None:
    sys.exit(run())
