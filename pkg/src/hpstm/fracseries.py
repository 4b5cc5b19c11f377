"""Generalized time-power series with spatial coefficients.

A :class:`TimePowerSeries` is a finite sum ``sum_k c_k(x) * t**mu_k`` where
each exponent ``mu_k = const_part + alpha_mult * alpha`` is held exactly.
Fractional integration, the Caputo derivative and the Sumudu transform all
act term-wise on this representation:

    J^a t^mu = Gamma(mu+1)/Gamma(mu+a+1) t^(mu+a)
    S[t^mu]  = Gamma(mu+1) u^mu
"""

from __future__ import annotations

import json
import weakref
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import expr as ex
from .errors import AlphaMismatch, DomainError
from .special import gamma, gamma_ratio

PRUNE_TOL = 1e-12
N_SAMPLES = 20
DEFAULT_DOMAIN = (-1.0, 2.0)


def _as_fraction(value):
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value)
    # shortest decimal repr, so 0.3 + 0.5 lands exactly on 0.8
    return Fraction(repr(float(value)))


@dataclass(frozen=True)
class AlphaExponent:
    """Exponent ``const_part + alpha_mult * alpha`` kept in exact form."""

    const_part: Fraction = Fraction(0)
    alpha_mult: int = 0

    def __post_init__(self):
        object.__setattr__(self, "const_part", _as_fraction(self.const_part))
        if self.const_part < 0 or self.alpha_mult < 0:
            raise ValueError(f"negative exponent component in {self!r}")

    def value(self, alpha):
        return float(self.const_part) + self.alpha_mult * alpha

    def __add__(self, other):
        return AlphaExponent(self.const_part + other.const_part, self.alpha_mult + other.alpha_mult)

    def __str__(self):
        if self.alpha_mult == 0:
            return str(self.const_part)
        a = "a" if self.alpha_mult == 1 else f"{self.alpha_mult}a"
        return a if self.const_part == 0 else f"{self.const_part}+{a}"


E0 = AlphaExponent()


def canonical_samples(domain, n=N_SAMPLES):
    """``n`` deterministic interior points of ``domain`` (cell midpoints)."""
    lo, hi = domain
    return lo + (hi - lo) * (np.arange(n) + 0.5) / n


_SAMPLE_CACHES = {}


def _sample_cache(domain):
    key = (float(domain[0]), float(domain[1]))
    entry = _SAMPLE_CACHES.get(key)
    if entry is None:
        entry = (canonical_samples(key), weakref.WeakKeyDictionary())
        _SAMPLE_CACHES[key] = entry
    return entry


def sample_values(coeff, domain):
    """Values of ``coeff`` at the canonical samples of ``domain`` (cached)."""
    xs, cache = _sample_cache(domain)
    return ex.evaluate_array(coeff, xs, cache=cache)


def is_negligible(coeff, domain, tol=PRUNE_TOL):
    if coeff is ex.ZERO:
        return True
    if isinstance(coeff, ex.Constant):
        return abs(coeff.value) < tol
    try:
        vals = sample_values(coeff, domain)
    except DomainError:
        return False
    return bool(np.all(np.abs(vals) < tol))


def _term_order(item, alpha):
    e = item[0]
    return (e.value(alpha), e.const_part, e.alpha_mult)


class TimePowerSeries:
    """Immutable finite series ``sum c(x) t^mu``.

    Terms with equal exponents are merged on construction and terms whose
    coefficient is below ``1e-12`` at all canonical samples of ``domain`` are
    dropped.  Terms are ordered by the concrete exponent value; distinct
    exact exponents that coincide numerically (``1`` and ``2*alpha`` at
    ``alpha = 0.5``) are kept apart and ordered by ``const_part``.
    """

    __slots__ = ("_terms", "alpha", "domain")

    def __init__(self, terms=(), alpha=1.0, domain=DEFAULT_DOMAIN, prune=True):
        merged = {}
        for e, c in terms:
            if not isinstance(e, AlphaExponent):
                e = AlphaExponent(*e) if isinstance(e, tuple) else AlphaExponent(e)
            c = ex.as_expr(c)
            if e in merged:
                merged[e] = ex.add(merged[e], c)
            else:
                merged[e] = c
        self.alpha = float(alpha)
        self.domain = (float(domain[0]), float(domain[1]))
        items = [
            (e, c) for e, c in merged.items()
            if not (prune and is_negligible(c, self.domain))
        ]
        items.sort(key=lambda it: _term_order(it, self.alpha))
        self._terms = tuple(items)

    @property
    def terms(self):
        return self._terms

    def __iter__(self):
        return iter(self._terms)

    def __len__(self):
        return len(self._terms)

    def __bool__(self):
        return bool(self._terms)

    def exponents(self):
        return [e for e, _ in self._terms]

    def coefficient(self, exponent):
        if not isinstance(exponent, AlphaExponent):
            exponent = AlphaExponent(*exponent)
        for e, c in self._terms:
            if e == exponent:
                return c
        return ex.ZERO

    def like(self, terms):
        return TimePowerSeries(terms, self.alpha, self.domain)

    def __repr__(self):
        body = ", ".join(f"({e}, {ex.to_string(c)})" for e, c in self._terms)
        return f"TimePowerSeries([{body}], alpha={self.alpha})"

    # convenience operators
    def __add__(self, other):
        return series_add(self, other)

    def __sub__(self, other):
        return series_add(self, series_scale(other, -1.0))

    def __neg__(self):
        return series_scale(self, -1.0)

    def __call__(self, x, t):
        return evaluate_series(self, x, t)


def constant_series(coeff, alpha, domain=DEFAULT_DOMAIN):
    """The series with a single t**0 term."""
    return TimePowerSeries([(E0, coeff)], alpha, domain)


def _check_alpha(s1, s2):
    if s1.alpha != s2.alpha:
        raise AlphaMismatch(f"series orders differ: {s1.alpha} vs {s2.alpha}")


def series_add(s1, s2):
    _check_alpha(s1, s2)
    return s1.like(list(s1.terms) + list(s2.terms))


def series_scale(s, factor):
    """Multiply every coefficient by a number or an expression in x."""
    f = ex.as_expr(factor)
    return s.like([(e, ex.mul(f, c)) for e, c in s.terms])


def series_mul(s1, s2, max_order=None):
    """Cauchy product; terms with ``alpha_mult > max_order`` are dropped."""
    _check_alpha(s1, s2)
    out = []
    for e1, c1 in s1.terms:
        for e2, c2 in s2.terms:
            e = e1 + e2
            if max_order is not None and e.alpha_mult > max_order:
                continue
            out.append((e, ex.mul(c1, c2)))
    return s1.like(out)


def series_diff_x(s, order=1):
    return s.like([(e, ex.differentiate(c, order)) for e, c in s.terms])


def _shift(e, order, alpha):
    if order == alpha:
        return AlphaExponent(e.const_part, e.alpha_mult + 1)
    return AlphaExponent(e.const_part + _as_fraction(order), e.alpha_mult)


def frac_integral(s, alpha=None):
    """Riemann-Liouville integral of order ``alpha`` (default: the series' own)."""
    order = s.alpha if alpha is None else float(alpha)
    if not order > 0:
        raise DomainError(f"integral order must be positive, got {order}")
    out = []
    for e, c in s.terms:
        mu = e.value(s.alpha)
        ratio = gamma_ratio(mu + 1.0, mu + order + 1.0)
        out.append((_shift(e, order, s.alpha), ex.mul(ratio, c)))
    return s.like(out)


def caputo_derivative(s, alpha=None):
    """Caputo derivative of order ``alpha`` in (0, 1]; kills t**0 terms."""
    order = s.alpha if alpha is None else float(alpha)
    if not 0 < order <= 1:
        raise DomainError(f"Caputo order must lie in (0, 1], got {order}")
    r = _as_fraction(order)
    out = []
    for e, c in s.terms:
        if e == E0:
            continue
        mu = e.value(s.alpha)
        if order == s.alpha and e.alpha_mult >= 1:
            new = AlphaExponent(e.const_part, e.alpha_mult - 1)
        elif e.const_part >= r:
            new = AlphaExponent(e.const_part - r, e.alpha_mult)
        elif mu < order:
            raise DomainError(f"t^{mu:g} with 0 < mu < {order} has no Caputo derivative in this class")
        else:
            raise DomainError(f"exponent {e} minus {order} is not representable")
        ratio = gamma_ratio(mu + 1.0, mu - order + 1.0)
        out.append((new, ex.mul(ratio, c)))
    return s.like(out)


# ---------------------------------------------------------------------------
# Sumudu images


class SumuduImage:
    """Term-wise Sumudu image: terms ``(u_power, scale, coeff)`` meaning
    ``scale * coeff(x) * u**u_power``."""

    __slots__ = ("terms", "alpha", "domain")

    def __init__(self, terms, alpha, domain):
        self.terms = tuple(terms)
        self.alpha = alpha
        self.domain = domain

    def __len__(self):
        return len(self.terms)

    def __repr__(self):
        body = ", ".join(f"({e}, {k:.6g}*{ex.to_string(c)})" for e, k, c in self.terms)
        return f"SumuduImage([{body}])"


def sumudu_forward(s):
    return SumuduImage(
        [(e, gamma(e.value(s.alpha) + 1.0), c) for e, c in s.terms], s.alpha, s.domain
    )


def sumudu_scale(img, alpha=None):
    """Multiply the image by ``u**alpha``."""
    order = img.alpha if alpha is None else float(alpha)
    return SumuduImage(
        [(_shift(e, order, img.alpha), k, c) for e, k, c in img.terms], img.alpha, img.domain
    )


def sumudu_inverse(img):
    """Term-wise inverse: ``u**a -> t**a / Gamma(a+1)``."""
    out = []
    for e, k, c in img.terms:
        g = gamma(e.value(img.alpha) + 1.0)
        out.append((e, ex.mul(k / g, c)))
    return TimePowerSeries(out, img.alpha, img.domain)


# ---------------------------------------------------------------------------
# evaluation


def evaluate_series(s, x, t):
    """Value of the series at scalar ``x`` and ``t >= 0``."""
    if t < 0:
        raise DomainError(f"t must be nonnegative, got {t}")
    total = 0.0
    for e, c in s.terms:
        mu = e.value(s.alpha)
        tp = 1.0 if mu == 0.0 else t ** mu
        if tp == 0.0:
            continue
        total += ex.evaluate(c, x) * tp
    return total


def evaluate_grid(s, xs, ts):
    """Values on the tensor grid ``xs x ts`` as an array of shape (len(xs), len(ts))."""
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    ts = np.atleast_1d(np.asarray(ts, dtype=float))
    if np.any(ts < 0):
        raise DomainError("t must be nonnegative")
    out = np.zeros((xs.size, ts.size))
    cache = {}
    for e, c in s.terms:
        mu = e.value(s.alpha)
        tp = np.ones_like(ts) if mu == 0.0 else ts ** mu
        out += np.outer(ex.evaluate_array(c, xs, cache=cache), tp)
    return out


def series_close(a, b, tol=1e-10, samples=None):
    """Term-wise comparison of two series on sample points.

    Each coefficient pair must satisfy ``|ca - cb| <= tol * (1 + |ca|)`` at
    every sample; a key missing on one side counts as a zero coefficient.
    """
    if samples is None:
        samples = canonical_samples(a.domain)
    keys = {e for e, _ in a.terms} | {e for e, _ in b.terms}
    for e in keys:
        va = ex.evaluate_array(a.coefficient(e), samples)
        vb = ex.evaluate_array(b.coefficient(e), samples)
        if not np.all(np.abs(va - vb) <= tol * (1.0 + np.abs(va))):
            return False
    return True


def max_coefficient_gap(a, b, samples):
    """Largest scaled coefficient difference ``|ca - cb| / (1 + |ca|)``."""
    keys = {e for e, _ in a.terms} | {e for e, _ in b.terms}
    worst = 0.0
    for e in keys:
        va = ex.evaluate_array(a.coefficient(e), samples)
        vb = ex.evaluate_array(b.coefficient(e), samples)
        worst = max(worst, float(np.max(np.abs(va - vb) / (1.0 + np.abs(va)))))
    return worst


# ---------------------------------------------------------------------------
# serialization


def to_document(s):
    return {
        "alpha": s.alpha,
        "domain": list(s.domain),
        "terms": [
            {"const_part": str(e.const_part), "alpha_mult": e.alpha_mult,
             "coefficient": ex.to_string(c)}
            for e, c in s.terms
        ],
    }


def from_document(doc):
    terms = [
        (AlphaExponent(Fraction(t["const_part"]), int(t["alpha_mult"])),
         ex.simplify_basic(ex.parse(t["coefficient"])))
        for t in doc["terms"]
    ]
    return TimePowerSeries(terms, doc["alpha"], tuple(doc.get("domain", DEFAULT_DOMAIN)))


def dumps(s):
    return json.dumps(to_document(s), indent=2)


def loads(text):
    return from_document(json.loads(text))


def term_norm(coeff, mu, t, xs):
    """Sup norm of ``coeff(x) * t**mu`` over ``xs``."""
    vals = ex.evaluate_array(coeff, xs)
    return float(np.max(np.abs(vals))) * (1.0 if mu == 0 else t ** mu)


__all__ = [
    "AlphaExponent", "TimePowerSeries", "SumuduImage", "series_add", "series_scale",
    "series_mul", "series_diff_x", "frac_integral", "caputo_derivative",
    "sumudu_forward", "sumudu_scale", "sumudu_inverse", "evaluate_series",
    "evaluate_grid", "series_close", "to_document", "from_document", "dumps",
    "loads", "canonical_samples", "constant_series",
]
