"""Command line interface: ``hpstm {solve,compare,sensitivity,figures,fixtures}``.

Exit codes: 0 on success, 2 on input errors, 3 on numerical failures.
"""

from __future__ import annotations

import argparse
import sys
import warnings

from . import __version__
from . import expr as ex
from . import fracseries as fs
from . import report as rp
from .errors import InputError, NumericalError
from .problems import bundled_names, load_problem
from .solvers import adm_solve, hpstm_solve

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC = 0, 2, 3


def _point(text):
    try:
        x, t = (float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected x,t but got {text!r}") from None
    return x, t


def _alpha(text):
    try:
        a = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not 0.0 < a <= 1.0:
        raise argparse.ArgumentTypeError(f"alpha must lie in (0, 1], got {a}")
    return a


def _write(text, out):
    if out:
        with open(out, "w", newline="", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_solve(args):
    problem = load_problem(args.problem)
    solver = adm_solve if args.method == "adm" else hpstm_solve
    chunks = []
    for a in args.alpha or problem.alphas:
        sol = solver(problem.with_alpha(a), args.terms)
        lines = [f"# {problem.name} alpha={a:g} method={sol.method} terms=0..{sol.n_terms}"]
        for k, u in enumerate(sol.terms):
            body = " + ".join(f"({ex.to_string(c)})*t^({e})" for e, c in u) or "0"
            lines.append(f"u{k} = {body}")
        if args.point:
            x, t = args.point
            lines.append(f"u({x:g}, {t:g}) = {sol(x, t):.12g}")
        lines.extend(f"warning: {w}" for w in sol.warnings)
        if args.json:
            lines.append(fs.dumps(sol.partial_sum))
        chunks.append("\n".join(lines) + "\n")
    _write("".join(chunks), args.out)


def cmd_compare(args):
    problem = load_problem(args.problem)
    report = rp.run_comparison(problem, args.alpha or None, args.point, args.terms, args.eps)
    _write(rp.emit_csv(report), args.out)


def cmd_sensitivity(args):
    problem = load_problem(args.problem)
    ns = tuple(args.ns) if args.ns else (3, 5, 7)
    report = rp.run_sensitivity(problem, args.alpha or None, ns, args.point)
    _write(rp.emit_csv(report), args.out)
    if args.timing:
        for c in report.cells:
            print(f"alpha={c.alpha:g} n={c.n} {c.seconds * 1e3:.1f} ms", file=sys.stderr)


def cmd_figures(args):
    problem = load_problem(args.problem)
    data = rp.figure_data(problem, args.alpha or None, x=args.x, n=args.terms)
    _write(rp.emit_csv(data), args.out)


def cmd_fixtures(args):
    fx = rp.table_fixtures()
    if args.table is not None:
        fx = [f for f in fx if f.table == args.table]
    _write(rp.fixtures_csv(fx), args.out)


def build_parser():
    parser = argparse.ArgumentParser(prog="hpstm", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    names = ", ".join(bundled_names())

    def common(p, point=(1.0, 0.5)):
        p.add_argument("problem", help=f"problem file or bundled name ({names})")
        p.add_argument("--alpha", type=_alpha, action="append", help="fractional order (repeatable)")
        p.add_argument("--terms", type=int, default=None, help="number of correction terms n")
        p.add_argument("--point", type=_point, default=point, help="evaluation point x,t")
        p.add_argument("--out", help="output file (default: stdout)")

    p = sub.add_parser("solve", help="print series terms")
    common(p, point=None)
    p.add_argument("--method", choices=("hpstm", "adm"), default="hpstm")
    p.add_argument("--json", action="store_true", help="also print the partial sum as JSON")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("compare", help="HPSTM/ADM/RBF/FDM values with table fixtures")
    common(p)
    p.add_argument("--eps", type=float, default=None, help="Gaussian width for the RBF run")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("sensitivity", help="alpha x n grid of value, residual, term ratio")
    common(p)
    p.add_argument("--n", dest="ns", type=int, action="append", help="term count (repeatable)")
    p.add_argument("--timing", action="store_true", help="print wall time per cell to stderr")
    p.set_defaults(func=cmd_sensitivity)

    p = sub.add_parser("figures", help="u(x, t) for t = 0, 0.01, .., 1 per alpha")
    common(p)
    p.add_argument("--x", type=float, default=1.0)
    p.set_defaults(func=cmd_figures)

    p = sub.add_parser("fixtures", help="list transcribed table values")
    p.add_argument("--table", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_fixtures)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    if getattr(args, "terms", None) is not None and args.terms < 1:
        print("error: --terms must be at least 1", file=sys.stderr)
        return EXIT_INPUT
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("default")
            args.func(args)
    except InputError as err:
        print(f"input error: {err}", file=sys.stderr)
        return EXIT_INPUT
    except (NumericalError, ArithmeticError) as err:
        print(f"numerical failure: {err}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as err:
        print(f"io error: {err}", file=sys.stderr)
        return EXIT_INPUT
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
