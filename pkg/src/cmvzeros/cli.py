"""``cmvzeros`` command line: build | zeros | perturb | verify | geronimus.

CSV outputs start with ``# generated: <timestamp>`` and ``# config: <json>``
lines; JSON outputs are ``{"generated", "config", "data"}`` with
``generated`` on its own line.  Exit codes: 0 ok, 1 verification failure,
2 usage or I/O error.
"""

from __future__ import annotations

import argparse
import ast
import csv
import io
import json
import math
import operator
import re
import sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import geronimus as ger
from .cmv import build_F, build_Fstar, build_factors, build_H, matrix_rows, signature
from .errors import CmvError, InvalidRadii, SolverFailure
from .perturb import FD_STEP, TRAJECTORY_COLUMNS, PerturbationSpec, trajectory
from .schur import constant, disk_random, load_json
from .spectra import CLUSTER_TOL, gershgorin_annulus, zeros
from .verify import run_all

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

BACKENDS = {"cmv": "cmv_eig", "hessenberg": "hessenberg_eig", "companion": "companion"}
EMITS = ("F", "Fstar", "H", "E", "factors")
KINDS = {"rotate-all": "rotate_all", "rotate-one": "rotate_one", "extend": "extend_last"}
# keys that name output destinations; left out of the embedded config
_OUTPUT_KEYS = {"out", "out_dir"}


class UsageError(Exception):
    pass


# -- number parsing -------------------------------------------------------------

_BINOPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul, ast.Div: operator.truediv}
_UNOPS = {ast.UAdd: operator.pos, ast.USub: operator.neg}


def _eval(node):
    if isinstance(node, ast.Expression):
        return _eval(node.body)
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float, complex)):
        return node.value
    if isinstance(node, ast.Name) and node.id == "pi":
        return math.pi
    if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
        return _BINOPS[type(node.op)](_eval(node.left), _eval(node.right))
    if isinstance(node, ast.UnaryOp) and type(node.op) in _UNOPS:
        return _UNOPS[type(node.op)](_eval(node.operand))
    raise ValueError("unsupported expression")


def parse_number(text: str) -> complex:
    """Arithmetic in numbers, ``pi``/``π`` and imaginary units ``j``/``i``.

    Examples: ``0.5``, ``-0.3+0.4j``, ``2π``, ``3pi/2``, ``0.1i``.
    """
    s = text.strip().replace("π", "pi").replace("−", "-").replace(" ", "")
    s = re.sub(r"(?<![A-Za-z])i\b", "j", s)  # lone i -> j
    s = re.sub(r"(\d|\.)i\b", r"\1j", s)
    s = re.sub(r"(\d|\.|j)(pi)", r"\1*\2", s)
    s = re.sub(r"(?<![\d.\w])j", "1j", s)
    try:
        return complex(_eval(ast.parse(s, mode="eval")))
    except (SyntaxError, ValueError, TypeError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"cannot parse number {text!r}") from exc


def parse_real(text: str) -> float:
    v = parse_number(text)
    if v.imag != 0:
        raise argparse.ArgumentTypeError(f"{text!r} must be real")
    return v.real


def parse_grid(text: str) -> np.ndarray:
    """``start:stop:count`` with both endpoints included."""
    parts = text.split(":")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"grid {text!r} must be start:stop:count")
    start, stop = parse_number(parts[0]), parse_number(parts[1])
    try:
        count = int(parts[2])
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"grid count {parts[2]!r} is not an integer") from exc
    if count < 1:
        raise argparse.ArgumentTypeError("grid count must be >= 1")
    grid = np.linspace(start, stop, count)
    return grid.real if start.imag == 0 and stop.imag == 0 else grid


def positive_float(text: str) -> float:
    v = parse_real(text)
    if not v > 0:
        raise argparse.ArgumentTypeError("tolerance must be positive")
    return v


def positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"{text!r} is not an integer") from exc
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


# -- output -------------------------------------------------------------------


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return str(v)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (complex, np.complexfloating)):
        return [_jsonable(float(obj.real)), _jsonable(float(obj.imag))]
    if isinstance(obj, (float, np.floating)):
        f = float(obj)
        return f if math.isfinite(f) else None
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def config_of(args: argparse.Namespace) -> dict:
    cfg = {k: v for k, v in vars(args).items() if k not in _OUTPUT_KEYS and k != "func"}
    return _jsonable(cfg)


def _timestamp() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def csv_text(config: dict, columns, rows, extra_headers=()) -> str:
    buf = io.StringIO()
    buf.write(f"# generated: {_timestamp()}\n")
    buf.write(f"# config: {json.dumps(config, sort_keys=True)}\n")
    for line in extra_headers:
        buf.write(f"# {line}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_fmt(v) for v in r])
    return buf.getvalue()


def json_text(config: dict, data) -> str:
    head = json.dumps(_timestamp())
    body = json.dumps({"config": config, "data": _jsonable(data)}, indent=2, sort_keys=True)
    # keep the timestamp on its own line so payload comparisons can drop it
    return "{\n  \"generated\": " + head + ",\n" + body[2:] + "\n"


def emit(args, text: str, name: str | None = None) -> None:
    if name is not None and getattr(args, "out_dir", None):
        path = Path(args.out_dir) / name
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
    elif getattr(args, "out", None):
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


# -- inputs -------------------------------------------------------------------


def load_sequence(args):
    """Sequence from ``--params``, ``--constant``, ``--free`` or ``--random``; returns (seq, n)."""
    n = args.n
    if args.params:
        seq = load_json(args.params)
        n = seq.N if n is None else n
        if seq.N < n:
            raise UsageError(f"{args.params}: file holds {seq.N} parameters, order {n} requested")
        return seq, n
    if n is None:
        raise UsageError("--n is required with generated inputs")
    if args.free:
        return constant(0.0, n), n
    if args.constant is not None:
        return constant(args.constant, n), n
    if args.random is not None:
        r_min, r_max = args.random
        return disk_random(r_min, r_max, args.seed, n), n
    raise UsageError("one of --params, --constant, --free or --random is required")


def _random_range(text: str):
    parts = text.split(":")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError("--random expects r_min:r_max")
    return parse_real(parts[0]), parse_real(parts[1])


def add_input(p: argparse.ArgumentParser) -> None:
    g = p.add_mutually_exclusive_group()
    g.add_argument("--params", metavar="FILE", help="JSON parameter file")
    g.add_argument("--constant", type=parse_number, metavar="A", help="a_k = A for every k")
    g.add_argument("--free", action="store_true", help="all parameters zero (phi_n = z^n)")
    g.add_argument("--random", type=_random_range, metavar="RMIN:RMAX",
                   help="uniform phase, modulus uniform in [RMIN, RMAX]")
    p.add_argument("--n", type=positive_int, help="order (default: length of the file)")
    p.add_argument("--seed", type=int, default=0, help="RNG seed (default 0)")


def add_output(p: argparse.ArgumentParser, out_dir: bool = False) -> None:
    p.add_argument("--out", metavar="PATH", help="output file (default stdout)")
    if out_dir:
        p.add_argument("--out-dir", metavar="DIR", help="write one file per matrix")


# -- subcommands --------------------------------------------------------------


def cmd_build(args) -> int:
    seq, n = load_sequence(args)
    wanted = EMITS if "all" in args.emit else args.emit
    mats = []
    for name in wanted:
        if name == "F":
            mats.append(("F", build_F(seq, n).dense))
        elif name == "Fstar":
            mats.append(("Fstar", build_Fstar(seq, n).dense))
        elif name == "H":
            mats.append(("H", build_H(seq, n).dense))
        elif name == "E":
            mats.append(("E", signature(seq, n).dense))
        elif name == "factors":
            fp = build_factors(seq, n)
            mats += [("F1", fp.F1), ("F2", fp.F2)]
    cfg = config_of(args)
    if args.out_dir:
        for name, M in mats:
            emit(args, csv_text(cfg, ("row", "col", "re", "im"), matrix_rows(M, args.dense)), f"{name}.csv")
        return EXIT_OK
    rows = [(name, *r) for name, M in mats for r in matrix_rows(M, args.dense)]
    emit(args, csv_text(cfg, ("matrix", "row", "col", "re", "im"), rows))
    return EXIT_OK


def cmd_zeros(args) -> int:
    seq, n = load_sequence(args)
    res = zeros(seq, n, BACKENDS[args.backend], cluster_tol=args.cluster_tol)
    columns = ["index", "re", "im", "modulus", "multiplicity", "residual"]
    rows = []
    for i, cl in enumerate(res.clusters):
        members = list(cl.members)
        resid = max(float(res.residuals[m]) for m in members)
        c = complex(cl.centroid)
        rows.append([i, c.real, c.imag, abs(c), cl.multiplicity, resid])
    extra = []
    if args.check_bounds:
        mods = np.abs(seq.params[:n])
        try:
            ann = gershgorin_annulus(float(mods.min()), float(mods.max()))
        except InvalidRadii as exc:
            raise UsageError(str(exc)) from exc
        extra.append("bounds: " + json.dumps(_jsonable(ann.to_json()), sort_keys=True))
        columns.append("in_annulus")
        for r in rows:
            r.append(bool(ann.contains(np.array([complex(r[1], r[2])]))[0]))
    emit(args, csv_text(config_of(args), columns, rows, extra))
    return EXIT_OK


def cmd_perturb(args) -> int:
    kind = KINDS[args.kind]
    text = args.grid if args.grid is not None else args.t_grid
    if text is None:
        raise UsageError("--grid (or --t-grid) is required")
    try:
        grid = parse_grid(text)
    except argparse.ArgumentTypeError as exc:
        raise UsageError(str(exc)) from exc
    if kind == "extend_last":
        if args.params:
            seg = load_json(args.params)
            n = args.n if args.n is not None else seg.N + 1
        elif args.n == 1 or (args.n is None and not (args.constant is not None or args.free or args.random)):
            seg, n = None, 1
        else:
            seg, n = load_sequence(args)
            n = n + 1 if args.n is None else n
        spec = PerturbationSpec(kind, seg, n, complex(grid[0]))
    else:
        if np.iscomplexobj(grid) and np.any(np.imag(grid) != 0):
            raise UsageError("rotation grids must be real")
        seq, n = load_sequence(args)
        if args.k is not None and kind == "rotate_one" and args.k > seq.N:
            raise UsageError(f"--k {args.k} exceeds the {seq.N} available parameters")
        spec = PerturbationSpec(kind, seq, n, float(np.real(grid[0])), args.k)
    rows = trajectory(spec, grid, h=args.fd_step)
    emit(args, csv_text(config_of(args), TRAJECTORY_COLUMNS, rows))
    return EXIT_OK


def cmd_verify(args) -> int:
    report = run_all(seed=args.seed, trials=args.trials, quasi=args.quasi, max_n=args.max_n,
                     geronimus_values=args.geronimus, perturb=not args.no_perturb)
    emit(args, json_text(config_of(args), report))
    return EXIT_OK if report["passed"] else EXIT_FAIL


def cmd_geronimus(args) -> int:
    ctx = ger.context(args.a)
    data = ger.report(ctx, ns=tuple(args.ns), t0=args.t0, t1=args.t1)
    checks = []
    for n in args.ns:
        if n > args.zeros_up_to:
            continue
        sp = zeros(constant(args.a, n), n)
        lam = sp.refined
        inside = ger.in_hull_region(ctx, lam)
        eq = max(abs(ger.zero_equation_residual(ctx, n, z)) for z in lam)
        ks = [abs(ger.kernel_closed_form(ctx, n, z, check=False)) for z in lam[inside]]
        checks.append({
            "n": n,
            "all_simple": sp.all_simple,
            "max_zero_equation_residual": eq,
            "zeros_in_region": int(np.sum(inside)),
            "zeros_outside_region": [complex(z) for z in lam[~inside]],
            "min_kernel_in_region": min(ks) if ks else None,
            "kernel_lower_bound": ger.kernel_lower_bound(ctx, n) if ctx.gap > 0 else None,
        })
    data["zero_checks"] = checks
    emit(args, json_text(config_of(args), data))
    return EXIT_OK


# -- parser -------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cmvzeros", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    b = sub.add_parser("build", help="dump F, Fstar, H, E or the factor pair as CSV")
    add_input(b)
    b.add_argument("--emit", nargs="+", choices=EMITS + ("all",), default=["F"])
    b.add_argument("--dense", action="store_true", help="include zero entries")
    add_output(b, out_dir=True)
    b.set_defaults(func=cmd_build)

    z = sub.add_parser("zeros", help="zero table of phi_n")
    add_input(z)
    z.add_argument("--backend", choices=tuple(BACKENDS), default="cmv")
    z.add_argument("--cluster-tol", type=positive_float, default=CLUSTER_TOL)
    z.add_argument("--check-bounds", action="store_true", help="annulus bound and containment flags")
    add_output(z)
    z.set_defaults(func=cmd_zeros)

    t = sub.add_parser("perturb", help="zero trajectories with analytic and finite-difference derivatives")
    t.add_argument("kind", choices=tuple(KINDS))
    add_input(t)
    t.add_argument("--k", type=positive_int, help="index rotated by rotate-one")
    t.add_argument("--grid", metavar="START:STOP:COUNT")
    t.add_argument("--t-grid", metavar="START:STOP:COUNT", help="alias of --grid (complex endpoints allowed)")
    t.add_argument("--fd-step", type=positive_float, default=FD_STEP)
    add_output(t)
    t.set_defaults(func=cmd_perturb)

    v = sub.add_parser("verify", help="run the invariant suites")
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--trials", type=positive_int, default=20)
    v.add_argument("--max-n", type=positive_int, default=16)
    v.add_argument("--quasi", action="store_true", help="alternate with sequences holding |a_k| > 1")
    v.add_argument("--geronimus", type=parse_number, action="append", default=[], metavar="A")
    v.add_argument("--no-perturb", action="store_true", help="skip the derivative suite")
    add_output(v)
    v.set_defaults(func=cmd_verify)

    g = sub.add_parser("geronimus", help="constant-parameter report")
    g.add_argument("--a", type=parse_number, required=True)
    g.add_argument("--ns", type=positive_int, nargs="+", default=[8, 16, 32, 64])
    g.add_argument("--t0", type=parse_real, default=math.pi / 2)
    g.add_argument("--t1", type=parse_real, default=3 * math.pi / 2)
    g.add_argument("--zeros-up-to", type=int, default=64, help="largest n for the zero checks")
    add_output(g)
    g.set_defaults(func=cmd_geronimus)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    try:
        return args.func(args)
    except SolverFailure as exc:
        print(f"cmvzeros: solver failure: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except (UsageError, CmvError, ValueError, OSError) as exc:
        print(f"cmvzeros: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
