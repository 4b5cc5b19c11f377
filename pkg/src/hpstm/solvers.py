"""HPSTM and ADM recursions for time-fractional PDEs.

Problems have the form (RHS form)::

    D^a u = R[u] + N[u] + f,      u(x, 0) = g(x)

or, in LHS form, ``D^a u + R[u] + N[u] = f``.  ``R`` is a linear
combination of spatial derivatives of ``u`` and ``N`` a polynomial in
``u, u_x, u_xx`` with coefficients in ``x``.  Both methods produce the terms
``u_0 .. u_n`` of a :class:`~hpstm.fracseries.TimePowerSeries` expansion.
"""

from __future__ import annotations

import re
import warnings
from dataclasses import dataclass, field, replace

import numpy as np

from . import expr as ex
from . import fracseries as fs
from .errors import NonConvergenceWarning, UnsupportedNonlinearity, ValidationError

SYMBOLS = ("u", "ux", "uxx")
_SYMBOL_ORDER = {"u": 0, "ux": 1, "uxx": 2}
DEFAULT_TERMS = 5
DIAGNOSTIC_T = 0.5


@dataclass(frozen=True)
class Monomial:
    """``coeff(x) * u**u * ux**ux * uxx**uxx``."""

    coeff: ex.Expr
    u: int = 0
    ux: int = 0
    uxx: int = 0

    @property
    def degree(self):
        return self.u + self.ux + self.uxx

    @property
    def powers(self):
        return (self.u, self.ux, self.uxx)

    def factors(self):
        """Derivative orders of the factors, one entry per power."""
        return [0] * self.u + [1] * self.ux + [2] * self.uxx

    def text(self):
        parts = []
        for name, p in zip(SYMBOLS, self.powers):
            if p == 1:
                parts.append(name)
            elif p > 1:
                parts.append(f"{name}^{p}")
        return "*".join(parts) or "1"


_MONO_FACTOR = re.compile(r"^\s*(uxx|ux|u)\s*(?:\^\s*(\d+))?\s*$")


def parse_monomial(text, coeff=ex.ONE):
    """Parse ``"u*ux^2"``-style text into a :class:`Monomial`."""
    powers = {"u": 0, "ux": 0, "uxx": 0}
    for part in text.split("*"):
        m = _MONO_FACTOR.match(part)
        if m is None:
            raise UnsupportedNonlinearity(
                f"nonlinear term {text!r} is not a monomial in u, ux, uxx"
            )
        powers[m.group(1)] += int(m.group(2) or 1)
    return Monomial(ex.as_expr(coeff), powers["u"], powers["ux"], powers["uxx"])


@dataclass(frozen=True)
class FPDEProblem:
    """A time-fractional PDE with polynomial nonlinearity.

    ``linear_op`` is a tuple of ``(derivative order, coeff)``, ``source`` a
    tuple of ``(t power, coeff)``.  ``form`` is ``"rhs"`` when the spatial
    terms sit on the right of ``D^a u = ...`` and ``"lhs"`` for
    ``D^a u + R u + N u = f``.
    """

    name: str
    alpha: float
    ic: ex.Expr
    linear_op: tuple = ()
    nonlinear_op: tuple = ()
    source: tuple = ()
    domain: tuple = (-4.0, 6.0)
    form: str = "rhs"
    alphas: tuple = ()
    n_terms: int = DEFAULT_TERMS
    exact: ex.Expr | None = None  # closed form in x and t, valid at alpha = 1
    description: str = ""
    rbf_eps: float = 0.1

    def __post_init__(self):
        if not 0.0 < self.alpha <= 1.0:
            raise ValidationError("alpha", f"must lie in (0, 1], got {self.alpha}")
        lo, hi = self.domain
        if not lo < hi:
            raise ValidationError("domain", f"need lo < hi, got {self.domain}")
        if self.form not in ("rhs", "lhs"):
            raise ValidationError("form", f"must be 'rhs' or 'lhs', got {self.form!r}")
        for order, _ in self.linear_op:
            if order not in (0, 1, 2):
                raise ValidationError("linear", f"derivative order {order} not in 0..2")
        for mono in self.nonlinear_op:
            if not isinstance(mono, Monomial):
                raise UnsupportedNonlinearity(f"{mono!r} is not a polynomial monomial")
            if mono.degree < 1 or min(mono.powers) < 0:
                raise ValidationError("nonlinear", f"monomial {mono.text()} must have degree >= 1")
        for power, _ in self.source:
            if int(power) != power or power < 0:
                raise ValidationError("source", f"t power must be a nonnegative integer, got {power}")
        if self.n_terms < 1:
            raise ValidationError("n", "must be at least 1")
        if not self.alphas:
            object.__setattr__(self, "alphas", (self.alpha,))
        object.__setattr__(self, "domain", (float(lo), float(hi)))

    @property
    def sign(self):
        return 1.0 if self.form == "rhs" else -1.0

    def with_alpha(self, alpha):
        return replace(self, alpha=float(alpha))

    def max_derivative(self):
        orders = [o for o, _ in self.linear_op]
        for mono in self.nonlinear_op:
            orders.extend(mono.factors())
        return max(orders, default=0)


@dataclass
class SeriesSolution:
    problem_name: str
    alpha: float
    n_terms: int
    terms: tuple
    partial_sum: fs.TimePowerSeries
    method: str = "hpstm"
    warnings: list = field(default_factory=list)

    def __call__(self, x, t):
        return fs.evaluate_series(self.partial_sum, x, t)

    def evaluate(self, x, t):
        return fs.evaluate_series(self.partial_sum, x, t)

    def evaluate_grid(self, xs, ts):
        return fs.evaluate_grid(self.partial_sum, xs, ts)


# ---------------------------------------------------------------------------
# truncated polynomials in the homotopy parameter


class HomotopyPolynomial:
    """Polynomial in the embedding parameter with series coefficients,
    truncated at ``degree``."""

    def __init__(self, coeffs, degree, alpha, domain):
        self.degree = degree
        self.alpha = alpha
        self.domain = domain
        zero = fs.TimePowerSeries((), alpha, domain)
        coeffs = list(coeffs)[: degree + 1]
        coeffs += [zero] * (degree + 1 - len(coeffs))
        self.coeffs = coeffs

    @classmethod
    def constant(cls, series, degree):
        return cls([series], degree, series.alpha, series.domain)

    def coefficient(self, k):
        return self.coeffs[k]

    def __add__(self, other):
        return HomotopyPolynomial(
            [fs.series_add(a, b) for a, b in zip(self.coeffs, other.coeffs)],
            self.degree, self.alpha, self.domain,
        )

    def __mul__(self, other):
        out = []
        for k in range(self.degree + 1):
            acc = []
            for i in range(k + 1):
                a, b = self.coeffs[i], other.coeffs[k - i]
                if a and b:
                    acc.extend(fs.series_mul(a, b).terms)
            out.append(fs.TimePowerSeries(acc, self.alpha, self.domain))
        return HomotopyPolynomial(out, self.degree, self.alpha, self.domain)

    def diff_x(self, order):
        return HomotopyPolynomial(
            [fs.series_diff_x(c, order) for c in self.coeffs],
            self.degree, self.alpha, self.domain,
        )


def _check_terms(terms, n):
    if len(terms) < n + 1:
        raise ValueError(f"need u_0..u_{n}, got {len(terms)} terms")


def he_polynomial(problem, terms, n):
    """He polynomial ``H_n``: coefficient of ``p**n`` in ``N(sum p**k u_k)``.

    Computed exactly by truncated polynomial arithmetic in ``p``, which is the
    same as ``1/n! d^n/dp^n`` at ``p = 0`` for polynomial ``N``.
    """
    _check_terms(terms, n)
    u0 = terms[0]
    for mono in problem.nonlinear_op:
        if not isinstance(mono, Monomial):
            raise UnsupportedNonlinearity(f"{mono!r} is not a polynomial monomial")
    U = HomotopyPolynomial(terms[: n + 1], n, u0.alpha, u0.domain)
    derivs = {0: U}
    total = HomotopyPolynomial([], n, u0.alpha, u0.domain)
    for mono in problem.nonlinear_op:
        prod = HomotopyPolynomial.constant(fs.constant_series(mono.coeff, u0.alpha, u0.domain), n)
        for order in mono.factors():
            if order not in derivs:
                derivs[order] = U.diff_x(order)
            prod = prod * derivs[order]
        total = total + prod
    return total.coefficient(n)


def _compositions(n, parts):
    """All tuples of ``parts`` nonnegative integers summing to ``n``."""
    if parts == 1:
        yield (n,)
        return
    for first in range(n + 1):
        for rest in _compositions(n - first, parts - 1):
            yield (first,) + rest


def adomian_polynomial(problem, terms, n):
    """Adomian polynomial ``A_n`` by direct enumeration.

    For a monomial with factors ``v_1 .. v_d`` (each ``u``, ``u_x`` or
    ``u_xx``), the coefficient of ``lambda**n`` is the sum over index tuples
    ``k_1 + .. + k_d = n`` of ``v_1[k_1] * .. * v_d[k_d]``.
    """
    _check_terms(terms, n)
    u0 = terms[0]
    alpha, domain = u0.alpha, u0.domain
    derived = {0: list(terms[: n + 1])}
    acc = []
    for mono in problem.nonlinear_op:
        if not isinstance(mono, Monomial):
            raise UnsupportedNonlinearity(f"{mono!r} is not a polynomial monomial")
        factors = mono.factors()
        for order in factors:
            if order not in derived:
                derived[order] = [fs.series_diff_x(t, order) for t in terms[: n + 1]]
        head = fs.constant_series(mono.coeff, alpha, domain)
        for idx in _compositions(n, len(factors)):
            prod = head
            for order, k in zip(factors, idx):
                v = derived[order][k]
                if not v:
                    prod = None
                    break
                prod = fs.series_mul(prod, v)
            if prod:
                acc.extend(prod.terms)
    return fs.TimePowerSeries(acc, alpha, domain)


# ---------------------------------------------------------------------------
# operators on whole series


def apply_linear(problem, s):
    """``R[s]``."""
    acc = []
    for order, coeff in problem.linear_op:
        d = fs.series_diff_x(s, order) if order else s
        acc.extend(fs.series_scale(d, coeff).terms)
    return s.like(acc)


def apply_nonlinear(problem, s):
    """``N[s]`` with full (untruncated) series products."""
    derivs = {0: s}
    acc = []
    for mono in problem.nonlinear_op:
        prod = fs.constant_series(mono.coeff, s.alpha, s.domain)
        for order in mono.factors():
            if order not in derivs:
                derivs[order] = fs.series_diff_x(s, order)
            prod = fs.series_mul(prod, derivs[order])
        acc.extend(prod.terms)
    return s.like(acc)


def initial_series(problem):
    return fs.constant_series(problem.ic, problem.alpha, problem.domain)


def source_series(problem):
    return fs.TimePowerSeries(
        [(fs.AlphaExponent(int(p), 0), ex.simplify_basic(c)) for p, c in problem.source],
        problem.alpha, problem.domain,
    )


def residual_series(problem, s):
    """``D^a s - R s - N s - f`` (RHS form) or ``D^a s + R s + N s - f`` (LHS form)."""
    lhs = fs.caputo_derivative(s, problem.alpha)
    spatial = fs.series_add(apply_linear(problem, s), apply_nonlinear(problem, s))
    r = fs.series_add(lhs, fs.series_scale(spatial, -problem.sign))
    return fs.series_add(r, fs.series_scale(source_series(problem), -1.0))


def _sum_terms(terms):
    first = terms[0]
    acc = []
    for t in terms:
        acc.extend(t.terms)
    return first.like(acc)


def _signed(s, sign):
    return s if sign == 1.0 else fs.series_scale(s, sign)


def _sumudu_step(s, alpha):
    return fs.sumudu_inverse(fs.sumudu_scale(fs.sumudu_forward(s), alpha))


def hpstm_solve(problem, n=None, diagnose=True):
    """Homotopy perturbation Sumudu transform solution with ``n + 1`` terms.

    ``u_0 = g + S^-1[u^a S[f]]`` and
    ``u_k = +/- S^-1[u^a S[R u_{k-1} + H_{k-1}]]``.
    """
    n = problem.n_terms if n is None else int(n)
    if n < 1:
        raise ValueError("n must be at least 1")
    alpha = problem.alpha
    u0 = initial_series(problem)
    src = source_series(problem)
    if src:
        u0 = fs.series_add(u0, _sumudu_step(src, alpha))
    terms = [u0]
    for k in range(1, n + 1):
        rhs = fs.series_add(apply_linear(problem, terms[k - 1]), he_polynomial(problem, terms, k - 1))
        terms.append(_signed(_sumudu_step(rhs, alpha), problem.sign))
    sol = SeriesSolution(problem.name, alpha, n, tuple(terms), _sum_terms(terms), "hpstm")
    if diagnose:
        _diagnose(sol, problem)
    return sol


def adm_solve(problem, n=None, diagnose=True):
    """Adomian decomposition solution with ``n + 1`` terms.

    ``u_0 = g + J^a f`` and ``u_{k+1} = +/- J^a (R u_k + A_k)``.
    """
    n = problem.n_terms if n is None else int(n)
    if n < 1:
        raise ValueError("n must be at least 1")
    alpha = problem.alpha
    u0 = initial_series(problem)
    src = source_series(problem)
    if src:
        u0 = fs.series_add(u0, fs.frac_integral(src, alpha))
    terms = [u0]
    for k in range(n):
        rhs = fs.series_add(apply_linear(problem, terms[k]), adomian_polynomial(problem, terms, k))
        terms.append(_signed(fs.frac_integral(rhs, alpha), problem.sign))
    sol = SeriesSolution(problem.name, alpha, n, tuple(terms), _sum_terms(terms), "adm")
    if diagnose:
        _diagnose(sol, problem)
    return sol


def term_norms(sol, t_probe, x_samples):
    xs = np.asarray(x_samples, dtype=float)
    return [
        float(np.max(np.abs(fs.evaluate_grid(u, xs, [t_probe])))) if u else 0.0
        for u in sol.terms
    ]


def convergence_ratios(sol, t_probe, x_samples):
    """Ratios ``||u_{k+1}|| / ||u_k||`` (sup norm over ``x_samples`` at
    ``t_probe``) for consecutive nonzero terms; stops at the first zero term."""
    if not t_probe > 0:
        raise ValueError("t_probe must be positive")
    norms = term_norms(sol, t_probe, x_samples)
    ratios = []
    for a, b in zip(norms, norms[1:]):
        if a == 0.0 or b == 0.0:
            break
        ratios.append(b / a)
    return ratios


def _diagnose(sol, problem, t_probe=DIAGNOSTIC_T):
    xs = fs.canonical_samples(problem.domain)
    try:
        ratios = convergence_ratios(sol, t_probe, xs)
    except ArithmeticError:
        return
    if ratios and max(ratios) > 1.0:
        msg = (
            f"{problem.name}: term ratio {max(ratios):.3g} > 1 at t={t_probe} "
            f"(alpha={problem.alpha}); series may not converge there"
        )
        sol.warnings.append(msg)
        warnings.warn(msg, NonConvergenceWarning, stacklevel=3)


def tail_norm(sol, m, t_probe, x_samples):
    """Sup norm of ``sum_{k>m} u_k`` over ``x_samples`` at ``t_probe``."""
    tail = sol.terms[m + 1:]
    if not tail:
        return 0.0
    return float(np.max(np.abs(fs.evaluate_grid(_sum_terms(list(tail)), x_samples, [t_probe]))))


__all__ = [
    "Monomial", "parse_monomial", "FPDEProblem", "SeriesSolution",
    "HomotopyPolynomial", "he_polynomial", "adomian_polynomial", "hpstm_solve",
    "adm_solve", "convergence_ratios", "residual_series", "apply_linear",
    "apply_nonlinear", "term_norms", "tail_norm",
]
