"""Problem definition files.

A problem file is a JSON object::

    {
      "name": "example2",
      "alpha": [1.0, 0.9],            # or a single number
      "ic": "(1 + 2*x)/(x^2 + x + 1)",
      "linear": [{"order": 2, "coeff": "1"}],
      "nonlinear": [{"monomial": "u^3", "coeff": "-2"}],
      "source": [{"t_power": 0, "coeff": "0"}],
      "domain": [-4, 6],
      "form": "rhs",                  # or "lhs"
      "n": 5,
      "exact": "...",                 # optional, in x and t, valid at alpha = 1
      "rbf_eps": 0.35                 # optional Gaussian width for RBF runs
    }

Names of bundled problems (``example1`` .. ``example3``) may be used in
place of a path.
"""

from __future__ import annotations

import json
from importlib import resources
from pathlib import Path

from . import expr as ex
from .errors import ExpressionSyntaxError, ProblemParseError, UnknownSymbol, ValidationError
from .solvers import FPDEProblem, parse_monomial

_REQUIRED = ("name", "alpha", "ic")


def bundled_names():
    root = resources.files("hpstm") / "data" / "problems"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json"))


def _bundled_text(name):
    res = resources.files("hpstm") / "data" / "problems" / f"{name}.json"
    if not res.is_file():
        return None
    return res.read_text(encoding="utf-8")


def _expr(doc, key, text, variables=("x",)):
    if not isinstance(text, (str, int, float)):
        raise ValidationError(key, f"expected an expression string, got {text!r}")
    try:
        return ex.simplify_basic(ex.parse(str(text), variables))
    except (ExpressionSyntaxError, UnknownSymbol) as err:
        raise ValidationError(key, str(err)) from err


def problem_from_document(doc):
    """Build an :class:`FPDEProblem` from a decoded JSON object."""
    if not isinstance(doc, dict):
        raise ValidationError("<root>", "problem file must hold a JSON object")
    for key in _REQUIRED:
        if key not in doc:
            raise ValidationError(key, "missing required field")
    alphas = doc["alpha"]
    if isinstance(alphas, (int, float)):
        alphas = [alphas]
    if not alphas or not all(isinstance(a, (int, float)) for a in alphas):
        raise ValidationError("alpha", "must be a number or a nonempty list of numbers")
    for a in alphas:
        if not 0.0 < a <= 1.0:
            raise ValidationError("alpha", f"{a} is outside (0, 1]")

    linear = []
    for i, item in enumerate(doc.get("linear", [])):
        try:
            order = int(item["order"])
        except (KeyError, TypeError, ValueError) as err:
            raise ValidationError(f"linear[{i}].order", "integer derivative order required") from err
        linear.append((order, _expr(doc, f"linear[{i}].coeff", item.get("coeff", "1"))))

    nonlinear = []
    for i, item in enumerate(doc.get("nonlinear", [])):
        if not isinstance(item, dict) or "monomial" not in item:
            raise ValidationError(f"nonlinear[{i}]", "needs a 'monomial' field")
        coeff = _expr(doc, f"nonlinear[{i}].coeff", item.get("coeff", "1"))
        nonlinear.append(parse_monomial(str(item["monomial"]), coeff))

    source = []
    for i, item in enumerate(doc.get("source", []) or []):
        try:
            power = int(item.get("t_power", 0))
        except (TypeError, ValueError, AttributeError) as err:
            raise ValidationError(f"source[{i}].t_power", "integer power of t required") from err
        source.append((power, _expr(doc, f"source[{i}].coeff", item.get("coeff", "0"))))

    domain = doc.get("domain", [-4.0, 6.0])
    if not (isinstance(domain, list) and len(domain) == 2):
        raise ValidationError("domain", "expected [lo, hi]")
    exact = doc.get("exact")
    return FPDEProblem(
        name=str(doc["name"]),
        alpha=float(alphas[0]),
        alphas=tuple(float(a) for a in alphas),
        ic=_expr(doc, "ic", doc["ic"]),
        linear_op=tuple(linear),
        nonlinear_op=tuple(nonlinear),
        source=tuple(source),
        domain=(float(domain[0]), float(domain[1])),
        form=doc.get("form", "rhs"),
        n_terms=int(doc.get("n", 5)),
        exact=None if exact is None else _expr(doc, "exact", exact, ("x", "t")),
        description=str(doc.get("description", "")),
        rbf_eps=float(doc.get("rbf_eps", 0.1)),
    )


def loads_problem(text, source="<string>"):
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as err:
        raise ProblemParseError(err.msg, f"{source}:{err.lineno}:{err.colno}") from err
    return problem_from_document(doc)


def load_problem(name_or_path):
    """Load a bundled problem by name or a problem file by path."""
    text = _bundled_text(str(name_or_path)) if "/" not in str(name_or_path) else None
    if text is not None:
        return loads_problem(text, f"{name_or_path}.json")
    path = Path(name_or_path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as err:
        raise ProblemParseError(f"cannot read problem file: {err.strerror}", str(path)) from err
    return loads_problem(text, str(path))


def load_fixtures():
    """Decoded contents of the bundled table fixtures."""
    res = resources.files("hpstm") / "data" / "fixtures.json"
    return json.loads(res.read_text(encoding="utf-8"))
