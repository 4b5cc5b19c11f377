"""Comparison and sensitivity reports, table fixtures and CSV output."""

from __future__ import annotations

import csv
import io
import time
from dataclasses import dataclass, field

import numpy as np

from . import expr as ex
from . import fracseries as fs
from .comparators import fdm_l1_solve, rbf_collocation_solve, residual_norm
from .errors import NumericalError, ValidationError
from .problems import load_fixtures
from .solvers import adm_solve, convergence_ratios, hpstm_solve

METHODS = ("HPSTM", "ADM", "RBF", "FDM")
COMPARE_HEADER = ["alpha", "method", "value", "fixture", "abs_discrepancy", "quantity", "source"]


@dataclass(frozen=True)
class TableFixture:
    table: int
    label: str
    caption: str
    example: str
    kind: str  # "value" or "abs_error"
    alpha: float
    method: str
    value: float

    @property
    def source(self):
        return f"Table {self.table} ({self.label})"


_FIXTURES = None


def table_fixtures():
    """All transcribed table entries, in table order."""
    global _FIXTURES
    if _FIXTURES is None:
        doc = load_fixtures()
        _FIXTURES = tuple(TableFixture(**row) for row in doc["fixtures"])
    return list(_FIXTURES)


def find_fixture(table, alpha, method, kind=None):
    for f in table_fixtures():
        if f.table == table and f.alpha == alpha and f.method == method and (kind is None or f.kind == kind):
            return f
    return None


@dataclass
class ReportRow:
    alpha: float
    method: str
    value: float | None
    quantity: str = "value"
    fixture: TableFixture | None = None
    note: str = ""

    @property
    def discrepancy(self):
        if self.value is None or self.fixture is None:
            return None
        return abs(self.value - self.fixture.value)


@dataclass
class ComparisonReport:
    problem: str
    point: tuple
    rows: list = field(default_factory=list)

    def row(self, alpha, method, quantity="value"):
        for r in self.rows:
            if r.alpha == alpha and r.method == method and r.quantity == quantity:
                return r
        return None

    def value(self, alpha, method):
        r = self.row(alpha, method)
        return None if r is None else r.value


@dataclass
class SensitivityCell:
    alpha: float
    n: int
    value: float
    residual: float
    xi_hat: float
    seconds: float


@dataclass
class SensitivityReport:
    problem: str
    point: tuple
    cells: list = field(default_factory=list)

    def cell(self, alpha, n):
        for c in self.cells:
            if c.alpha == alpha and c.n == n:
                return c
        return None


def _check_point(problem, point):
    x, t = point
    lo, hi = problem.domain
    if not lo <= x <= hi:
        raise ValidationError("point", f"x={x} outside domain {problem.domain}")
    if t < 0:
        raise ValidationError("point", "t must be nonnegative")


def run_comparison(problem, alphas=None, point=(1.0, 0.5), n=None, rbf_eps=None):
    """Evaluate HPSTM, ADM, RBF and FDM at ``point`` for each alpha and join
    the transcribed fixtures of the problem's tables."""
    _check_point(problem, point)
    x, t = point
    alphas = list(alphas or problem.alphas)
    n = problem.n_terms if n is None else n
    eps = problem.rbf_eps if rbf_eps is None else rbf_eps
    report = ComparisonReport(problem.name, (x, t))
    computed = {}
    for a in alphas:
        p = problem.with_alpha(a)
        h = hpstm_solve(p, n, diagnose=False)
        computed[(a, "HPSTM")] = h(x, t)
        computed[(a, "ADM")] = adm_solve(p, n, diagnose=False)(x, t)
        runners = {
            "RBF": lambda: rbf_collocation_solve(p, N=100, eps=eps, Nt=100, T=max(1.0, t)),
            "FDM": lambda: fdm_l1_solve(p, Nx=100, Nt=100, T=max(1.0, t)),
        }
        for name, run in runners.items():
            try:
                computed[(a, name)] = run().value(x, t)
            except NumericalError as err:
                computed[(a, name)] = err
        if problem.exact is not None:
            exact = ex.evaluate(problem.exact, x, {"t": t})
            computed[(a, "HPSTM", "abs_error")] = abs(exact - computed[(a, "HPSTM")])

    used = set()
    fixtures = [f for f in table_fixtures() if f.example == problem.name] if point == (1.0, 0.5) else []

    def add(a, method, quantity, fixture):
        key = (a, method) if quantity == "value" else (a, method, quantity)
        val = computed.get(key)
        note = ""
        if isinstance(val, Exception):
            note, val = f"{type(val).__name__}: {val}", None
        report.rows.append(ReportRow(a, method, val, quantity, fixture, note))
        used.add(key)

    for f in fixtures:
        if f.alpha in alphas:
            add(f.alpha, f.method, f.kind, f)
    for a in alphas:
        for m in METHODS:
            if (a, m) not in used:
                add(a, m, "value", None)
        if (a, "HPSTM", "abs_error") in computed and (a, "HPSTM", "abs_error") not in used:
            add(a, "HPSTM", "abs_error", None)
    report.rows.sort(key=lambda r: (-r.alpha, r.quantity != "value", r.method,
                                    r.fixture.table if r.fixture else 0))
    return report


def run_sensitivity(problem, alphas=None, ns=(3, 5, 7), point=(1.0, 0.5)):
    """Value, residual and term-ratio diagnostic over an alpha x n grid."""
    if not ns:
        raise ValidationError("ns", "need at least one term count")
    _check_point(problem, point)
    x, t = point
    report = SensitivityReport(problem.name, (x, t))
    samples = fs.canonical_samples(problem.domain)
    for a in alphas or problem.alphas:
        p = problem.with_alpha(a)
        for n in ns:
            start = time.perf_counter()
            sol = hpstm_solve(p, n, diagnose=False)
            value = sol(x, t)
            res = residual_norm(p, sol, [x], [t]) if t > 0 else 0.0
            ratios = convergence_ratios(sol, t, samples) if t > 0 else []
            xi = max(ratios) if ratios else 0.0
            report.cells.append(SensitivityCell(a, n, value, res, xi, time.perf_counter() - start))
    return report


def figure_data(problem, alphas=None, x=1.0, n=None, step=0.01):
    """``(ts, {alpha: u(x, ts)})`` for the solution curves."""
    ts = np.round(np.arange(0.0, 1.0 + step / 2, step), 10)
    curves = {}
    for a in alphas or problem.alphas:
        sol = hpstm_solve(problem.with_alpha(a), n, diagnose=False)
        curves[a] = fs.evaluate_grid(sol.partial_sum, [x], ts)[0]
    return ts, curves


# ---------------------------------------------------------------------------
# CSV


def _fmt(v):
    return "" if v is None else f"{v:.10g}"


def comparison_csv(report):
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\r\n")
    w.writerow(COMPARE_HEADER)
    for r in report.rows:
        src = r.fixture.source if r.fixture else ("" if r.note else "computed")
        if r.note:
            src = f"{src}; {r.note}" if src else r.note
        w.writerow([
            f"{r.alpha:g}", r.method, _fmt(r.value),
            _fmt(r.fixture.value if r.fixture else None), _fmt(r.discrepancy),
            r.quantity, src,
        ])
    return out.getvalue()


def sensitivity_csv(report):
    # wall-clock times are left out so that repeated runs are byte-identical
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\r\n")
    w.writerow(["alpha", "n", "value", "residual", "xi_hat"])
    for c in report.cells:
        w.writerow([f"{c.alpha:g}", c.n, _fmt(c.value), _fmt(c.residual), _fmt(c.xi_hat)])
    return out.getvalue()


def figure_csv(ts, curves):
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\r\n")
    alphas = list(curves)
    w.writerow(["t"] + [f"alpha={a:g}" for a in alphas])
    for i, t in enumerate(ts):
        w.writerow([f"{t:g}"] + [_fmt(curves[a][i]) for a in alphas])
    return out.getvalue()


def fixtures_csv(fixtures=None):
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\r\n")
    w.writerow(["table", "label", "example", "kind", "alpha", "method", "value"])
    for f in table_fixtures() if fixtures is None else fixtures:
        w.writerow([f.table, f.label, f.example, f.kind, f"{f.alpha:g}", f.method, f"{f.value:g}"])
    return out.getvalue()


def emit_csv(report, path=None):
    """Write a report (or ``(ts, curves)`` figure data) as CSV.

    Returns the text; writes it to ``path`` when given.
    """
    if report is None:
        text = comparison_csv(ComparisonReport("", (0.0, 0.0)))
    elif isinstance(report, ComparisonReport):
        text = comparison_csv(report)
    elif isinstance(report, SensitivityReport):
        text = sensitivity_csv(report)
    elif isinstance(report, tuple) and len(report) == 2:
        text = figure_csv(*report)
    else:
        raise TypeError(f"cannot emit {type(report).__name__}")
    if path is not None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            fh.write(text)
    return text
