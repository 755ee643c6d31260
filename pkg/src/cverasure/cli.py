"""Command-line entry point: parameter sweeps, MC verification and plots.

Exit codes: 0 success, 1 verification failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from decimal import Decimal, InvalidOperation
from pathlib import Path
from typing import Callable, Sequence

from . import __version__
from .capacity import c_ea_classical, q_dv, q_dv_ea, q_ea, q_standard
from .decoupling import BISECT_TOL, c_ea, c_standard, capacity, max_rate, p_star
from .entropy import h2
from .numerics import DomainError
from .plon import DEFAULT_MASS, fidelity_ansatz
from .typical import submult_exponent

GRID_SLACK = 1e-12


class UsageError(Exception):
    pass


# ---------------------------------------------------------------- grids

def _num(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise UsageError(f"not a number: {text!r}") from None
    if not math.isfinite(v):
        raise UsageError(f"not a finite number: {text!r}")
    return v


def parse_grid(spec: str) -> list[float]:
    """Comma list of values and inclusive ``start:stop:step`` ranges.

    Range points are computed in decimal so 0:0.5:0.05 hits 0.5 exactly.
    """
    out: list[float] = []
    for item in spec.split(","):
        item = item.strip()
        if not item:
            continue
        if ":" not in item:
            out.append(_num(item))
            continue
        parts = item.split(":")
        if len(parts) != 3:
            raise UsageError(f"range must be start:stop:step, got {item!r}")
        for p in parts:
            _num(p)
        try:
            start, stop, step = (Decimal(p) for p in parts)
        except InvalidOperation:
            raise UsageError(f"bad range {item!r}") from None
        if step <= 0:
            raise UsageError(f"range step must be > 0, got {item!r}")
        if stop < start:
            raise UsageError(f"range stop below start in {item!r}")
        count = math.floor(float((stop - start) / step) + GRID_SLACK) + 1
        out.extend(float(start + i * step) for i in range(count))
    if not out:
        raise UsageError(f"empty grid {spec!r}")
    return out


def parse_int_list(spec: str) -> list[int]:
    vals = parse_grid(spec)
    if any(v != int(v) for v in vals):
        raise UsageError(f"expected integers, got {spec!r}")
    return [int(v) for v in vals]


# ---------------------------------------------------------------- tables

def fmt(v) -> str:
    if isinstance(v, str):
        return v
    if isinstance(v, int):
        return str(v)
    return format(v, ".12g")


def _meta(args: argparse.Namespace) -> dict:
    skip = {"func", "out", "plot", "workers", "format"}
    flags = {k: v for k, v in sorted(vars(args).items()) if k not in skip and v is not None}
    return {"version": __version__, **flags}


def _meta_line(meta: dict) -> str:
    body = " ".join(f"{k}={v}" for k, v in meta.items() if k != "version")
    return f"# cverasure {meta['version']} {body}"


def render_table(columns: Sequence[str], rows: Sequence[Sequence], meta: dict, fmt_name: str) -> str:
    if fmt_name == "json":
        return json.dumps({"meta": meta, "columns": list(columns), "rows": [list(r) for r in rows]},
                          indent=1) + "\n"
    buf = io.StringIO()
    buf.write(_meta_line(meta) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([fmt(v) for v in r])
    return buf.getvalue()


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _table_command(build: Callable[[argparse.Namespace], tuple[list[str], list[list]]]):
    def run(args: argparse.Namespace) -> int:
        columns, rows = build(args)
        meta = _meta(args)
        _emit(render_table(columns, rows, meta, args.format), args.out)
        if args.plot:
            from .plotting import render_svg
            numeric = [j for j, _ in enumerate(columns)
                       if all(isinstance(r[j], (int, float)) for r in rows)]
            svg = render_svg([columns[j] for j in numeric], [[float(r[j]) for j in numeric] for r in rows],
                             title=args.command)
            Path(args.plot).write_text(svg)
        return 0

    return run


def _check_range(name: str, vals: Sequence[float], lo: float, hi: float,
                 lo_open: bool = False, hi_open: bool = False) -> None:
    for v in vals:
        if v < lo or v > hi or (lo_open and v == lo) or (hi_open and v == hi):
            lb = "(" if lo_open else "["
            rb = ")" if hi_open else "]"
            raise UsageError(f"{name}={v} outside {lb}{lo}, {hi}{rb}")


def _grid_arg(args, name, **kw) -> list[float]:
    vals = parse_grid(getattr(args, name))
    if kw:
        _check_range(name, vals, **kw)
    return vals


# ---------------------------------------------------------------- commands

def build_capacity(args):
    ps = _grid_arg(args, "p", lo=0.0, hi=1.0)
    nbars = _grid_arg(args, "nbar", lo=0.0, hi=math.inf, lo_open=True)
    cols = ["p", "nbar", "q_standard", "q_ea", "c_ea_classical", "q_dv_d2", "q_dv_ea_d2"]
    rows = [[p, n, q_standard(p, n), q_ea(p, n), c_ea_classical(p, n), q_dv(p, 2), q_dv_ea(p, 2)]
            for n in nbars for p in ps]
    return cols, rows


def build_rate(args):
    ps = _grid_arg(args, "p", lo=0.0, hi=1.0)
    nbars = _grid_arg(args, "nbar", lo=0.0, hi=math.inf, lo_open=True)
    cols = ["nbar", "p", "q_optm", "rate", "capacity", "gap", "c_q_optm"]
    rows = []
    for n in nbars:
        for p in ps:
            res = max_rate(n, p, args.assisted, tol=args.tol)
            cap = capacity(p, n, args.assisted)
            c = _c(args.assisted)(p, res.q_optm)
            rows.append([n, p, res.q_optm, res.rate, cap, cap - res.rate, c])
    return cols, rows


def _c(assisted: str):
    return c_ea if assisted == "ea" else c_standard


def build_pstar(args):
    nbars = _grid_arg(args, "nbar", lo=0.0, hi=math.inf, lo_open=True)
    rows = [[n, p_star(n, "standard", args.tol), p_star(n, "ea", args.tol)] for n in nbars]
    return ["nbar", "p_star_standard", "p_star_ea"], rows


def build_constant(args):
    ps = _grid_arg(args, "p", lo=0.0, hi=1.0)
    qspec = [s.strip() for s in args.q.split(",") if s.strip()]
    if not qspec:
        raise UsageError("empty q list")
    qs: list[float | str] = []
    for s in qspec:
        if s == "optm":
            qs.append(s)
        else:
            v = _num(s)
            _check_range("q", [v], lo=0.0, hi=1.0)
            qs.append(v)
    if "optm" in qs and args.nbar is None:
        raise UsageError("q=optm needs --nbar")
    if args.nbar is not None and args.nbar <= 0:
        raise UsageError(f"nbar must be > 0, got {args.nbar}")
    cols = ["p"]
    for kind in ("standard", "ea"):
        cols += [f"c_{kind}_q{q if q == 'optm' else fmt(q)}" for q in qs]
    rows = []
    for p in ps:
        row = [p]
        for kind in ("standard", "ea"):
            for q in qs:
                qv = max_rate(args.nbar, p, kind, tol=args.tol).q_optm if q == "optm" else q
                row.append(_c(kind)(p, qv))
        rows.append(row)
    return cols, rows


def build_fidelity(args):
    Ns = parse_int_list(args.N)
    if any(n < 1 for n in Ns):
        raise UsageError("N must be >= 1")
    nbars = _grid_arg(args, "nbar", lo=0.0, hi=math.inf, lo_open=True)
    if not 0.0 < args.mass < 1.0:
        raise UsageError(f"mass must lie in (0, 1), got {args.mass}")
    rows = []
    for n in nbars:
        z2 = n / (n + 1.0)
        rows.append([n] + [fidelity_ansatz(N, z2, args.mass, workers=args.workers) for N in Ns])
    return ["nbar"] + [f"fid_N{N}" for N in Ns], rows


def build_submult(args):
    xs = _grid_arg(args, "x", lo=0.0, hi=1.0, lo_open=True, hi_open=True)
    ms = _grid_arg(args, "m_plus", lo=0.0, hi=math.inf)
    cols = ["x"] + [f"exponent_m{fmt(m)}" for m in ms] + ["h2"]
    rows = [[x] + [submult_exponent(x, m) for m in ms] + [h2(x)] for x in xs]
    return cols, rows


def cmd_verify(args) -> int:
    from . import mc
    if args.suite != "all" and args.suite not in mc.SUITES:
        raise UsageError(f"unknown suite {args.suite!r}; choose from all, {', '.join(mc.SUITES)}")
    if args.samples is not None and args.samples < 1:
        raise UsageError("samples must be >= 1")
    if args.workers < 1:
        raise UsageError("workers must be >= 1")
    report = mc.run_suite(args.suite, seed=args.seed, workers=args.workers, samples=args.samples)
    _emit(json.dumps(report, indent=1, sort_keys=True) + "\n", args.out)
    return 0 if report["passed"] else 1


def cmd_plot(args) -> int:
    from .plotting import EmptyTableError, csv_to_svg
    try:
        text = Path(args.csv).read_text()
    except OSError as exc:
        raise UsageError(str(exc)) from None
    try:
        svg = csv_to_svg(text, title=args.title or "")
    except EmptyTableError as exc:
        raise UsageError(str(exc)) from None
    Path(args.svg).write_text(svg)
    return 0


# ---------------------------------------------------------------- parser

def _seed(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"seed must be an integer, got {text!r}") from None
    if not 0 <= v < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must lie in [0, 2^64)")
    return v


def _positive_float(text: str) -> float:
    v = _num(text)
    if v <= 0:
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text!r}")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--out", metavar="PATH", help="write output here instead of stdout")
    common.add_argument("--seed", type=_seed, default=0)
    common.add_argument("--tol", type=_positive_float, default=BISECT_TOL,
                        help="root-finding tolerance")
    common.add_argument("--workers", type=int, default=1)

    table = argparse.ArgumentParser(add_help=False, parents=[common])
    table.add_argument("--plot", metavar="SVG", help="also render the table as an SVG chart")

    parser = argparse.ArgumentParser(prog="cverasure", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    s = sub.add_parser("capacity", parents=[table], help="capacity curves")
    s.add_argument("--p", required=True, help="grid of erasure probabilities")
    s.add_argument("--nbar", required=True, help="grid of mean photon numbers")
    s.set_defaults(func=_table_command(build_capacity))

    s = sub.add_parser("rate", parents=[table], help="maximum decodable rate against capacity")
    s.add_argument("--p", required=True)
    s.add_argument("--nbar", required=True)
    s.add_argument("--assisted", choices=("standard", "ea"), default="standard")
    s.set_defaults(func=_table_command(build_rate))

    s = sub.add_parser("pstar", parents=[table], help="critical erasure probability")
    s.add_argument("--nbar", required=True)
    s.set_defaults(func=_table_command(build_pstar))

    s = sub.add_parser("constant", parents=[table], help="energy-independent rate gaps c(p, q)")
    s.add_argument("--p", required=True)
    s.add_argument("--q", required=True, help="comma list of q values; 'optm' uses max_rate at --nbar")
    s.add_argument("--nbar", type=float)
    s.set_defaults(func=_table_command(build_constant))

    s = sub.add_parser("fidelity", parents=[table], help="fidelity of the averaged state to the product ansatz")
    s.add_argument("--N", required=True, help="comma list of mode counts")
    s.add_argument("--nbar", required=True)
    s.add_argument("--mass", type=float, default=DEFAULT_MASS)
    s.set_defaults(func=_table_command(build_fidelity))

    s = sub.add_parser("submult", parents=[table], help="submultiplicativity exponent")
    s.add_argument("--x", required=True)
    s.add_argument("--m-plus", dest="m_plus", required=True)
    s.set_defaults(func=_table_command(build_submult))

    s = sub.add_parser("verify", parents=[common], help="Monte-Carlo verification suites (JSON)")
    s.add_argument("suite")
    s.add_argument("--samples", type=int)
    s.set_defaults(func=cmd_verify)

    s = sub.add_parser("plot", help="render a CLI CSV as an SVG line chart")
    s.add_argument("csv")
    s.add_argument("svg")
    s.add_argument("--title")
    s.set_defaults(func=cmd_plot)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, DomainError) as exc:
        parser.exit(2, f"{parser.prog}: error: {exc}\n")


if __name__ == "__main__":
    sys.exit(main())
