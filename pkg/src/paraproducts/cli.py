"""Command-line entry point: ``python -m paraproducts SUBCOMMAND ...``.

Exit codes: 0 on success, 2 on invalid input (bad flag, malformed config or
file, unwritable output), 3 when ``--assert`` is set and a check fails.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .dyadic_grid import Grid, Window
from .errors import ParaproductError
from .experiments import EXPERIMENTS, ExperimentConfig, generate_symbol, run_experiment, trial_rng
from .io import read_function_csv, read_matrix_csv, write_matrix_csv
from .paraproduct_operators import haar_paraproduct
from .schatten import schatten_norm, singular_values
from .symbols_besov import (
    besov_dyadic_norm,
    bmo_dyadic_diagnostic,
    difference_besov_norm_1d,
    difference_besov_norm_2d,
)

EXIT_OK, EXIT_INVALID, EXIT_ASSERT = 0, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise _UsageError(message)


class _UsageError(Exception):
    pass


def _floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a comma list of numbers, got {text!r}")


def _ints(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a comma list of integers, got {text!r}")


def _common(p: argparse.ArgumentParser, experiment=True):
    p.add_argument("--config", type=Path, help="JSON config; explicit flags override it")
    p.add_argument("--n", type=int)
    p.add_argument("--K", type=_ints)
    p.add_argument("--eps", help="bit string, e.g. 10")
    p.add_argument("--delta", help="bit string, e.g. 01")
    p.add_argument("--seed", type=int)
    p.add_argument("--gen", help="uniform | sparse | decay:THETA | file:PATH")
    p.add_argument("--out", type=Path)
    if experiment:
        p.add_argument("--p", type=_floats)
        p.add_argument("--trials", type=int)
        p.add_argument("--ell", type=_ints)
        p.add_argument("--cutoff", type=float)
        p.add_argument("--workers", type=int)
        p.add_argument("--format", choices=["csv", "json"])
        p.add_argument("--assert", dest="check", action="store_true",
                       help="exit with status 3 if any acceptance check fails")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="paraproducts", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    b = sub.add_parser("build-op", help="assemble a paraproduct matrix and write it as CSV")
    _common(b, experiment=False)

    s = sub.add_parser("schatten", help="Schatten norms of a matrix CSV")
    s.add_argument("--matrix", type=Path, required=True)
    s.add_argument("--p", type=_floats, required=True)
    s.add_argument("--out", type=Path)

    bs = sub.add_parser("besov", help="dyadic, difference and BMO norms of a function CSV")
    bs.add_argument("--function", type=Path, required=True)
    bs.add_argument("--n", type=int, default=1)
    bs.add_argument("--K", type=int, required=True)
    bs.add_argument("--width", type=int, default=1)
    bs.add_argument("--shifted", action="store_true")
    bs.add_argument("--p", type=_floats, required=True)
    bs.add_argument("--cutoff", type=float)
    bs.add_argument("--out", type=Path)

    for name in EXPERIMENTS:
        _common(sub.add_parser(name, help=f"run the {name} experiment"))
    return parser


def _config(args, experiment: str) -> ExperimentConfig:
    base = {}
    if args.config is not None:
        base = json.loads(Path(args.config).read_text())
        if not isinstance(base, dict):
            raise ParaproductError("config must be a JSON object")
        name = base.pop("experiment", experiment)
        if name != experiment:
            raise ParaproductError(f"config is for {name!r}, not {experiment!r}")
    for key in ("n", "K", "eps", "delta", "seed", "gen", "p", "trials", "ell", "cutoff",
                "workers", "format"):
        v = getattr(args, key, None)
        if v is not None:
            base[key] = v
    if getattr(args, "out", None) is not None:
        base["out"] = str(args.out)
    return ExperimentConfig.from_dict({"experiment": experiment, **base})


def _emit(text: str, out) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def _build_op(args) -> int:
    cfg = _config(args, "build-op")
    K = cfg.K[0]
    windows = (Window(K),) * cfg.n
    eps, delta = cfg.pattern(1, 0)
    alpha = generate_symbol(cfg.gen, trial_rng(cfg.seed, 0, K), windows)
    T = haar_paraproduct(alpha, eps, delta, windows)
    if args.out is None:
        from .io import matrix_to_csv

        sys.stdout.write(matrix_to_csv(T))
    else:
        write_matrix_csv(args.out, T)
    return EXIT_OK


def _schatten(args) -> int:
    M = read_matrix_csv(args.matrix)
    spec = singular_values(M)
    report = {
        "rows": M.shape[0],
        "cols": M.shape[1],
        "p": args.p,
        "schatten_norms": [schatten_norm(spec, p) for p in args.p],
        "singular_values": [float(v) for v in spec.values],
    }
    _emit(json.dumps(report, indent=1) + "\n", args.out)
    return EXIT_OK


def _besov(args) -> int:
    window = Window(args.K, args.width, args.shifted)
    f = read_function_csv(args.function, (window,) * args.n)
    grids = [Grid.G0, Grid.G1] if args.shifted else [Grid.G0]
    out = {"p": args.p, "dyadic": {}, "difference": {}, "bmo_diagnostic": {}}
    import itertools

    for gp in itertools.product(grids, repeat=args.n):
        name = "".join(g.name for g in gp)
        out["dyadic"][name] = [besov_dyadic_norm(f, p, gp) for p in args.p]
        out["bmo_diagnostic"][name] = bmo_dyadic_diagnostic(f, gp)
    if args.n in (1, 2):
        diff = difference_besov_norm_1d if args.n == 1 else difference_besov_norm_2d
        out["difference"] = {repr(p): diff(f, p, args.cutoff) for p in args.p if p >= 1}
    _emit(json.dumps(out, indent=1) + "\n", args.out)
    return EXIT_OK


def _experiment(args) -> int:
    cfg = _config(args, args.command)
    report = run_experiment(cfg)
    _emit(report.render(), cfg.out)
    for name, ok in report.checks.items():
        print(f"{'PASS' if ok else 'FAIL'} {name}", file=sys.stderr)
    if args.check and not report.passed:
        return EXIT_ASSERT
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "build-op":
            return _build_op(args)
        if args.command == "schatten":
            return _schatten(args)
        if args.command == "besov":
            return _besov(args)
        return _experiment(args)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (ParaproductError, OSError, json.JSONDecodeError, np.linalg.LinAlgError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
