"""Exception and warning types shared across the package.

Input problems (bad expressions, malformed problem files) derive from
:class:`InputError`; numerical breakdowns derive from :class:`NumericalError`.
The CLI maps the two families onto distinct exit codes.
"""


class InputError(Exception):
    """Base class for user-input errors."""


class NumericalError(RuntimeError):
    """Base class for numerical failures."""


class ExpressionSyntaxError(InputError, SyntaxError):
    """Malformed expression text.  ``offset`` is the 0-based byte offset."""

    def __init__(self, message, text="", offset=0):
        self.text = text
        self.offset = offset
        self.msg = message
        Exception.__init__(self, f"{message} at offset {offset}: {text!r}")

    def __str__(self):
        return self.args[0]


class UnknownSymbol(InputError, NameError):
    def __init__(self, name, offset=0):
        # NameError.__init__ resets .name, so set attributes afterwards
        super().__init__(f"unknown symbol {name!r} at offset {offset}")
        self.name = name
        self.offset = offset


class DomainError(NumericalError, ArithmeticError):
    """Evaluation hit a pole or an invalid power (or gamma of a nonpositive)."""

    def __init__(self, message, subtree=None):
        self.subtree = subtree
        if subtree is not None:
            message = f"{message} in subexpression {subtree}"
        super().__init__(message)


class AlphaMismatch(ValueError):
    pass


class UnsupportedNonlinearity(InputError, ValueError):
    pass


class ProblemParseError(InputError):
    def __init__(self, message, location=None):
        self.location = location
        if location is not None:
            message = f"{location}: {message}"
        super().__init__(message)


class ValidationError(InputError, ValueError):
    def __init__(self, field, message):
        self.field = field
        super().__init__(f"{field}: {message}")


class DivergenceError(NumericalError):
    pass


class StabilityError(NumericalError):
    pass


class IllConditionedError(NumericalError):
    def __init__(self, condition, eps, suggestion=None):
        self.condition = condition
        self.eps = eps
        self.suggestion = suggestion
        msg = f"collocation matrix condition estimate {condition:.3e} exceeds 1e14 (eps={eps})"
        if suggestion is not None:
            msg += f"; try eps={suggestion:.4g}"
        super().__init__(msg)


class NonConvergenceWarning(RuntimeWarning):
    """Successive series terms are not contracting on the diagnostic window."""
