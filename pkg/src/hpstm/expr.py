"""Small expression engine over one spatial variable.

Grammar accepted by :func:`parse` (EBNF)::

    expr     := term (('+' | '-') term)*
    term     := factor (('*' | '/') factor)*
    factor   := ('+' | '-') factor | base ('^' rational)?
    base     := number | 'x' | 'exp' '(' expr ')' | '(' expr ')'
    rational := ['-'] number ['/' integer] | '(' ['-'] number ['/' integer] ')'

Unary signs and the parenthesised exponent form are small extensions of the
bare grammar so that printed expressions can always be read back.

Nodes are immutable and interned: building the same node twice returns the
same object, so structural equality is identity and derivatives can be
cached on the node.  The raw node classes (``Add(a, b)`` etc.) build exactly
the tree asked for; the lower-case constructors (:func:`add`, :func:`mul`,
:func:`power`, ...) canonicalise as they go (constant folding, flattening,
collection of like terms and powers).  Comparison of two expressions for
mathematical equality is numeric, see :func:`equivalent`.
"""

from __future__ import annotations

import hashlib
import math
import re
import threading
import weakref
from fractions import Fraction

import numpy as np

from .errors import DomainError, ExpressionSyntaxError, UnknownSymbol

__all__ = [
    "Expr", "Constant", "Variable", "Add", "Mul", "Pow", "Exp", "Neg",
    "parse", "evaluate", "evaluate_array", "differentiate", "simplify_basic",
    "to_string", "equivalent", "const", "add", "mul", "power", "exp", "neg",
    "as_expr", "ZERO", "ONE", "X",
]

_TABLE = weakref.WeakValueDictionary()
_LOCK = threading.Lock()


class Expr:
    """Base class of expression nodes."""

    __slots__ = ("_args", "_digest", "_d1", "__weakref__")

    def __new__(cls, *args):
        args = cls._normalize(args)
        key = (cls, args)
        with _LOCK:
            node = _TABLE.get(key)
            if node is None:
                node = object.__new__(cls)
                node._args = args
                node._digest = cls._make_digest(args)
                node._d1 = None
                _TABLE[key] = node
        return node

    @classmethod
    def _normalize(cls, args):
        return tuple(args)

    @classmethod
    def _make_digest(cls, args):
        h = hashlib.blake2b(digest_size=8)
        h.update(cls.__name__.encode())
        for a in args:
            if isinstance(a, Expr):
                h.update(a._digest)
            else:
                h.update(repr(a).encode())
            h.update(b"|")
        return h.digest()

    def __reduce__(self):
        return (type(self), self._args)

    @property
    def children(self):
        return tuple(a for a in self._args if isinstance(a, Expr))

    def __repr__(self):
        return f"{type(self).__name__}({', '.join(map(repr, self._args))})"

    def __str__(self):
        return to_string(self)

    # arithmetic goes through the canonicalising constructors
    def __add__(self, other):
        return add(self, other)

    def __radd__(self, other):
        return add(other, self)

    def __sub__(self, other):
        return add(self, neg(as_expr(other)))

    def __rsub__(self, other):
        return add(other, neg(self))

    def __mul__(self, other):
        return mul(self, other)

    def __rmul__(self, other):
        return mul(other, self)

    def __truediv__(self, other):
        return mul(self, power(as_expr(other), -1))

    def __rtruediv__(self, other):
        return mul(other, power(self, -1))

    def __neg__(self):
        return neg(self)

    def __pow__(self, exponent):
        return power(self, exponent)


class Constant(Expr):
    __slots__ = ()

    @classmethod
    def _normalize(cls, args):
        (value,) = args
        value = float(value)
        if value == 0.0:
            value = 0.0  # fold -0.0
        return (value,)

    @property
    def value(self):
        return self._args[0]


class Variable(Expr):
    __slots__ = ()

    @property
    def name(self):
        return self._args[0]


class Add(Expr):
    __slots__ = ()


class Mul(Expr):
    __slots__ = ()


class Pow(Expr):
    __slots__ = ()

    @classmethod
    def _normalize(cls, args):
        base, exponent = args
        return (as_expr(base), Fraction(exponent))

    @property
    def base(self):
        return self._args[0]

    @property
    def exponent(self):
        return self._args[1]


class Exp(Expr):
    __slots__ = ()

    @property
    def arg(self):
        return self._args[0]


class Neg(Expr):
    __slots__ = ()

    @property
    def arg(self):
        return self._args[0]


ZERO = Constant(0.0)
ONE = Constant(1.0)
X = Variable("x")


def as_expr(value):
    if isinstance(value, Expr):
        return value
    if isinstance(value, (int, float, Fraction, np.floating, np.integer)):
        return Constant(float(value))
    raise TypeError(f"cannot convert {type(value).__name__} to Expr")


def const(value):
    return Constant(float(value))


# ---------------------------------------------------------------------------
# canonicalising constructors


def _sort_key(node):
    return node._digest


def _split_coeff(term):
    """Return (numeric factor, remainder) of a canonical term."""
    if isinstance(term, Mul):
        first = term._args[0]
        if isinstance(first, Constant):
            rest = term._args[1:]
            return first.value, rest[0] if len(rest) == 1 else Mul(*rest)
    return 1.0, term


def add(*terms):
    flat = []
    for t in terms:
        t = as_expr(t)
        if isinstance(t, Add):
            flat.extend(t._args)
        elif isinstance(t, Neg):
            flat.append(neg(t.arg))
        else:
            flat.append(t)
    total = 0.0
    collected = {}
    for t in flat:
        if isinstance(t, Constant):
            total += t.value
            continue
        c, rest = _split_coeff(t)
        collected[rest] = collected.get(rest, 0.0) + c
    out = []
    for rest, c in collected.items():
        if c == 0.0:
            continue
        out.append(rest if c == 1.0 else _with_coeff(c, rest))
    out.sort(key=_sort_key)
    if total != 0.0:
        out.append(Constant(total))
    if not out:
        return ZERO
    if len(out) == 1:
        return out[0]
    return Add(*out)


def _with_coeff(c, rest):
    if isinstance(rest, Mul):
        return Mul(Constant(c), *rest._args)
    return Mul(Constant(c), rest)


def mul(*factors):
    coeff = 1.0
    bases = {}
    exp_args = []
    stack = [as_expr(f) for f in factors]
    stack.reverse()
    while stack:
        f = stack.pop()
        if isinstance(f, Constant):
            coeff *= f.value
        elif isinstance(f, Mul):
            stack.extend(reversed(f._args))
        elif isinstance(f, Neg):
            coeff = -coeff
            stack.append(f.arg)
        elif isinstance(f, Exp):
            exp_args.append(f.arg)
        elif isinstance(f, Pow):
            bases[f.base] = bases.get(f.base, Fraction(0)) + f.exponent
        else:
            bases[f] = bases.get(f, Fraction(0)) + 1
    if coeff == 0.0:
        return ZERO
    out = []
    for b, e in bases.items():
        if e == 0:
            continue
        p = power(b, e)
        if isinstance(p, Constant):
            coeff *= p.value
        elif isinstance(p, Mul):
            # power() may distribute over a product base
            for g in p._args:
                if isinstance(g, Constant):
                    coeff *= g.value
                else:
                    out.append(g)
        else:
            out.append(p)
    if exp_args:
        e = exp(add(*exp_args))
        if isinstance(e, Constant):
            coeff *= e.value
        else:
            out.append(e)
    if coeff == 0.0:
        return ZERO
    out.sort(key=_sort_key)
    if not out:
        return Constant(coeff)
    if coeff == 1.0:
        return out[0] if len(out) == 1 else Mul(*out)
    return Mul(Constant(coeff), *out)


def _const_power(v, e):
    """Real value of v**e for a rational e, or None if undefined."""
    if v == 0.0:
        return 0.0 if e > 0 else None
    if v > 0.0:
        return v ** float(e)
    if e.denominator % 2 == 0:
        return None
    mag = abs(v) ** float(e)
    return -mag if e.numerator % 2 else mag


def power(base, exponent):
    base = as_expr(base)
    e = Fraction(exponent)
    if e == 0:
        return ONE
    if e == 1:
        return base
    if isinstance(base, Constant):
        v = _const_power(base.value, e)
        if v is not None and math.isfinite(v):
            return Constant(v)
        return Pow(base, e)
    if e.denominator == 1:
        if isinstance(base, Pow):
            return power(base.base, base.exponent * e)
        if isinstance(base, Exp):
            return exp(mul(Constant(float(e)), base.arg))
        if isinstance(base, Mul):
            return mul(*(power(f, e) for f in base._args))
        if isinstance(base, Neg):
            return mul(Constant(-1.0 if e.numerator % 2 else 1.0), power(base.arg, e))
    return Pow(base, e)


def exp(arg):
    arg = as_expr(arg)
    if isinstance(arg, Constant):
        return Constant(math.exp(arg.value))
    return Exp(arg)


def neg(arg):
    return mul(Constant(-1.0), arg)


def simplify_basic(e):
    """Rebuild ``e`` bottom-up through the canonicalising constructors.

    Folds constants, removes additive zeros and multiplicative ones and
    flattens nested sums and products.  The value is unchanged wherever the
    original is defined.
    """
    memo = {}

    def rec(node):
        hit = memo.get(node)
        if hit is not None:
            return hit
        if isinstance(node, (Constant, Variable)):
            out = node
        elif isinstance(node, Add):
            out = add(*(rec(c) for c in node._args))
        elif isinstance(node, Mul):
            out = mul(*(rec(c) for c in node._args))
        elif isinstance(node, Pow):
            out = power(rec(node.base), node.exponent)
        elif isinstance(node, Exp):
            out = exp(rec(node.arg))
        elif isinstance(node, Neg):
            out = neg(rec(node.arg))
        else:
            raise TypeError(node)
        memo[node] = out
        return out

    return rec(e)


# ---------------------------------------------------------------------------
# differentiation


def _diff1(node, var):
    if var == "x" and node._d1 is not None:
        return node._d1
    if isinstance(node, Constant):
        out = ZERO
    elif isinstance(node, Variable):
        out = ONE if node.name == var else ZERO
    elif isinstance(node, Add):
        out = add(*(_diff1(c, var) for c in node._args))
    elif isinstance(node, Mul):
        args = node._args
        terms = []
        for i, f in enumerate(args):
            df = _diff1(f, var)
            if df is ZERO:
                continue
            terms.append(mul(*args[:i], df, *args[i + 1:]))
        out = add(*terms)
    elif isinstance(node, Pow):
        db = _diff1(node.base, var)
        if db is ZERO:
            out = ZERO
        else:
            out = mul(Constant(float(node.exponent)), power(node.base, node.exponent - 1), db)
    elif isinstance(node, Exp):
        da = _diff1(node.arg, var)
        out = ZERO if da is ZERO else mul(exp(node.arg), da)
    elif isinstance(node, Neg):
        out = neg(_diff1(node.arg, var))
    else:
        raise TypeError(node)
    if var == "x":
        node._d1 = out
    return out


def differentiate(e, order=1, var="x"):
    """``order``-fold derivative of ``e`` with respect to ``var``."""
    if order < 0:
        raise ValueError("order must be nonnegative")
    for _ in range(order):
        e = _diff1(e, var)
    return e


# ---------------------------------------------------------------------------
# evaluation


def _postorder(root):
    order = []
    seen = set()
    stack = [(root, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            order.append(node)
            continue
        if node in seen:
            continue
        seen.add(node)
        stack.append((node, True))
        for c in node._args:
            if isinstance(c, Expr) and c not in seen:
                stack.append((c, False))
    return order


def _pow_array(base, e, node):
    if e.denominator == 1:
        if e < 0 and np.any(base == 0.0):
            raise DomainError("division by zero", node)
        return base ** float(e)
    if e < 0 and np.any(base == 0.0):
        raise DomainError("division by zero", node)
    neg_mask = base < 0.0
    if np.any(neg_mask):
        if e.denominator % 2 == 0:
            raise DomainError("even root of a negative number", node)
        mag = np.abs(base) ** float(e)
        sign = -1.0 if e.numerator % 2 else 1.0
        return np.where(neg_mask, sign * mag, mag)
    return base ** float(e)


def evaluate_array(e, xs, bindings=None, cache=None):
    """Evaluate ``e`` elementwise over the array ``xs``.

    ``bindings`` maps names of other variables to scalars or arrays.  ``cache``
    is an optional mutable mapping node -> array reused across calls made
    with the same ``xs``.
    """
    xs = np.asarray(xs, dtype=float)
    env = {"x": xs}
    if bindings:
        env.update({k: np.asarray(v, dtype=float) for k, v in bindings.items()})
    memo = {} if cache is None else cache
    if e in memo:
        return memo[e]
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        for node in _postorder(e):
            if node in memo:
                continue
            if isinstance(node, Constant):
                val = np.full(xs.shape, node.value)
            elif isinstance(node, Variable):
                try:
                    val = np.broadcast_to(env[node.name], xs.shape).astype(float)
                except KeyError:
                    raise UnknownSymbol(node.name) from None
            elif isinstance(node, Add):
                args = node._args
                val = memo[args[0]].copy()
                for c in args[1:]:
                    val += memo[c]
            elif isinstance(node, Mul):
                args = node._args
                val = memo[args[0]].copy()
                for c in args[1:]:
                    val *= memo[c]
            elif isinstance(node, Pow):
                val = _pow_array(memo[node.base], node.exponent, node)
            elif isinstance(node, Exp):
                val = np.exp(memo[node.arg])
            elif isinstance(node, Neg):
                val = -memo[node.arg]
            else:
                raise TypeError(node)
            memo[node] = val
    return memo[e]


def evaluate(e, x, bindings=None):
    """Evaluate ``e`` at a scalar ``x``."""
    return float(evaluate_array(e, np.array([float(x)]), bindings)[0])


def equivalent(a, b, samples, tol=1e-10):
    """Numerical identity test of two expressions on ``samples``."""
    va = evaluate_array(a, samples)
    vb = evaluate_array(b, samples)
    return bool(np.all(np.abs(va - vb) <= tol * (1.0 + np.abs(va))))


# ---------------------------------------------------------------------------
# printing

_PREC_ADD, _PREC_MUL, _PREC_UNARY, _PREC_POW, _PREC_ATOM = 1, 2, 3, 4, 5


def _fmt_number(v):
    if v.is_integer() and abs(v) < 1e15:
        return str(int(v))
    return repr(v)


def _fmt_exponent(e):
    if e.denominator == 1 and e >= 0:
        return str(e.numerator)
    return f"({e.numerator}/{e.denominator})" if e.denominator != 1 else f"({e.numerator})"


def _render(node, memo):
    """Return (text, precedence)."""
    hit = memo.get(node)
    if hit is not None:
        return hit
    if isinstance(node, Constant):
        v = node.value
        out = (_fmt_number(v), _PREC_UNARY if v < 0 else _PREC_ATOM)
    elif isinstance(node, Variable):
        out = (node.name, _PREC_ATOM)
    elif isinstance(node, Add):
        parts = []
        for i, c in enumerate(node._args):
            if i > 0 and isinstance(c, Constant) and c.value < 0:
                parts.append(" - " + _fmt_number(-c.value))
                continue
            coeff, rest = _split_coeff(c)
            if i > 0 and coeff < 0:
                text, prec = _render(_with_coeff(-coeff, rest) if coeff != -1.0 else rest, memo)
                parts.append(" - " + (text if prec > _PREC_ADD else f"({text})"))
            else:
                text, prec = _render(c, memo)
                if i > 0:
                    parts.append(" + " + (text if prec > _PREC_ADD else f"({text})"))
                else:
                    parts.append(text)
        out = ("".join(parts), _PREC_ADD)
    elif isinstance(node, Mul):
        num, den = [], []
        for f in node._args:
            if isinstance(f, Pow) and f.exponent < 0:
                den.append(power(f.base, -f.exponent))
            else:
                num.append(f)
        lead = ""
        if num and isinstance(num[0], Constant) and num[0].value == -1.0 and len(num) > 1:
            lead = "-"
            num = num[1:]

        def join(fs):
            texts = []
            for f in fs:
                text, prec = _render(f, memo)
                texts.append(text if prec >= _PREC_MUL + 1 else f"({text})")
            return "*".join(texts)

        text = join(num) if num else "1"
        if den:
            d = join(den)
            text = f"{text}/{d}" if len(den) == 1 else f"{text}/({d})"
        out = (lead + text, _PREC_UNARY if lead else _PREC_MUL)
    elif isinstance(node, Pow):
        text, prec = _render(node.base, memo)
        if prec < _PREC_ATOM:
            text = f"({text})"
        out = (f"{text}^{_fmt_exponent(node.exponent)}", _PREC_POW)
    elif isinstance(node, Exp):
        out = (f"exp({_render(node.arg, memo)[0]})", _PREC_ATOM)
    elif isinstance(node, Neg):
        text, prec = _render(node.arg, memo)
        out = ("-" + (text if prec > _PREC_UNARY else f"({text})"), _PREC_UNARY)
    else:
        raise TypeError(node)
    memo[node] = out
    return out


def to_string(e):
    """Infix text of ``e`` that :func:`parse` reads back to the same value."""
    return _render(e, {})[0]


# ---------------------------------------------------------------------------
# parsing

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>\*\*|[-+*/^()]))"
)


class _Parser:
    def __init__(self, text, variables):
        self.text = text
        self.variables = variables
        self.tokens = []
        pos = 0
        n = len(text)
        while pos < n:
            if text[pos].isspace():
                pos += 1
                continue
            m = _TOKEN.match(text, pos)
            if m is None or m.end() == pos:
                raise self._err(f"unexpected character {text[pos]!r}", pos)
            kind = m.lastgroup
            start = m.start(kind)
            value = m.group(kind)
            if value == "**":
                value = "^"
            self.tokens.append((kind, value, start))
            pos = m.end()
        self.tokens.append(("end", "", n))
        self.i = 0

    def _byte_offset(self, pos):
        return len(self.text[:pos].encode("utf-8"))

    def _err(self, message, pos):
        return ExpressionSyntaxError(message, self.text, self._byte_offset(pos))

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value):
        kind, v, off = self.take()
        if v != value:
            found = "end of input" if kind == "end" else repr(v)
            raise self._err(f"expected {value!r}, found {found}", off)

    def parse(self):
        e = self.expr()
        kind, v, off = self.peek()
        if kind != "end":
            raise self._err(f"unexpected {v!r}", off)
        return e

    def expr(self):
        terms = [self.term()]
        while self.peek()[1] in ("+", "-"):
            _, op, _ = self.take()
            t = self.term()
            terms.append(t if op == "+" else Neg(t))
        return terms[0] if len(terms) == 1 else Add(*terms)

    def term(self):
        factors = [self.factor()]
        while self.peek()[1] in ("*", "/"):
            _, op, _ = self.take()
            f = self.factor()
            factors.append(f if op == "*" else Pow(f, -1))
        return factors[0] if len(factors) == 1 else Mul(*factors)

    def factor(self):
        kind, v, off = self.peek()
        if v in ("+", "-"):
            self.take()
            f = self.factor()
            return Neg(f) if v == "-" else f
        base = self.base()
        if self.peek()[1] == "^":
            self.take()
            return Pow(base, self.rational())
        return base

    def _number(self):
        kind, v, off = self.take()
        if kind != "num":
            found = "end of input" if kind == "end" else repr(v)
            raise self._err(f"expected a number, found {found}", off)
        return Fraction(v)

    def _signed_ratio(self):
        sign = 1
        if self.peek()[1] == "-":
            self.take()
            sign = -1
        elif self.peek()[1] == "+":
            self.take()
        r = self._number()
        if self.peek()[1] == "/":
            self.take()
            kind, v, off = self.peek()
            d = self._number()
            if d.denominator != 1 or d == 0:
                raise self._err("exponent denominator must be a nonzero integer", off)
            r = r / d
        return sign * r

    def rational(self):
        if self.peek()[1] == "(":
            self.take()
            r = self._signed_ratio()
            self.expect(")")
            return r
        return self._signed_ratio()

    def base(self):
        kind, v, off = self.take()
        if kind == "num":
            return Constant(float(v))
        if kind == "name":
            if v == "exp":
                self.expect("(")
                inner = self.expr()
                self.expect(")")
                return Exp(inner)
            if v in self.variables:
                return Variable(v)
            raise UnknownSymbol(v, self._byte_offset(off))
        if v == "(":
            inner = self.expr()
            self.expect(")")
            return inner
        found = "end of input" if kind == "end" else repr(v)
        raise self._err(f"unexpected {found}", off)


def parse(text, variables=("x",)):
    """Parse infix ``text`` into an (unsimplified) expression tree."""
    if not isinstance(text, str):
        raise TypeError("expression text must be a string")
    return _Parser(text, tuple(variables)).parse()
