"""Independent numerical solvers used to cross-check the series methods.

* :func:`fdm_l1_solve` - L1 scheme for the Caputo derivative in time,
  central differences in space, one tridiagonal solve per step.
* :func:`rbf_collocation_solve` - Gaussian RBF (Kansa) collocation in space
  with the same L1 time stepping, one dense solve per step.

Both treat nonlinear terms semi-implicitly: in each monomial the factor with
the highest derivative order enters at the new level (one power of it) and
the remaining factors are frozen at the previous level.  Dirichlet data
come from the exact solution when ``alpha == 1`` and one is known, otherwise
from the HPSTM partial sum.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np

from . import _kernels as kn
from . import expr as ex
from . import fracseries as fs
from .errors import (
    DivergenceError,
    IllConditionedError,
    StabilityError,
    ValidationError,
)
from .special import gamma
from .solvers import hpstm_solve, residual_series

DIVERGENCE_LIMIT = 1e8
COND_LIMIT = 1e14


@dataclass
class GridSolution:
    """``u[i, j]`` is the value at ``x[i]``, ``t[j]``."""

    x: np.ndarray
    t: np.ndarray
    u: np.ndarray
    alpha: float
    scheme: dict = field(default_factory=dict)

    def value(self, x, t):
        """Bilinear interpolation on the grid."""
        col = np.array([np.interp(x, self.x, self.u[:, j]) for j in range(self.t.size)])
        return float(np.interp(t, self.t, col))

    def to_csv(self, fh=None):
        return _write_csv(self.x, self.t, self.u, fh)


@dataclass
class RBFSolution:
    """``lambdas[k]`` holds the expansion coefficients at ``times[k]``."""

    centers: np.ndarray
    eps: float
    times: np.ndarray
    lambdas: np.ndarray
    alpha: float
    condition: float = float("nan")

    def basis(self, xs):
        phi, _, _ = kn.gaussian_matrices(np.atleast_1d(np.asarray(xs, dtype=float)), self.centers, self.eps)
        return phi

    def level_values(self, xs, k):
        return self.basis(xs) @ self.lambdas[k]

    def value(self, x, t):
        """Value at ``(x, t)``; linear in t between stored levels."""
        vals = self.basis([x]) @ self.lambdas.T
        return float(np.interp(t, self.times, vals[0]))

    def values(self):
        """Nodal values at the centers, shape ``(N, Nt + 1)``."""
        return self.basis(self.centers) @ self.lambdas.T

    def to_csv(self, fh=None):
        return _write_csv(self.centers, self.times, self.values(), fh)


def _write_csv(xs, ts, u, fh):
    own = fh is None
    out = io.StringIO() if own else fh
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["x", "t", "u"])
    for j, t in enumerate(ts):
        for i, x in enumerate(xs):
            w.writerow([f"{x:.12g}", f"{t:.12g}", f"{u[i, j]:.15g}"])
    return out.getvalue() if own else None


# ---------------------------------------------------------------------------
# shared pieces


def boundary_function(problem):
    """Callable ``(xs, t) -> values`` giving Dirichlet data."""
    if problem.exact is not None and problem.alpha == 1.0:
        exact = problem.exact

        def g(xs, t):
            return ex.evaluate_array(exact, xs, bindings={"t": t})
        return g
    series = hpstm_solve(problem, diagnose=False).partial_sum

    def g(xs, t):
        return fs.evaluate_grid(series, xs, [t])[:, 0]
    return g


class _Operator:
    """Splits ``sign * (R u + N u)`` into ``a u_xx + b u_x + c u`` with
    coefficients frozen at a given state."""

    def __init__(self, problem, xs):
        self.sign = problem.sign
        self.xs = xs
        self.lin = [(o, ex.evaluate_array(c, xs)) for o, c in problem.linear_op]
        self.monos = [(m, ex.evaluate_array(m.coeff, xs)) for m in problem.nonlinear_op]
        self.source = [(int(p), ex.evaluate_array(c, xs)) for p, c in problem.source]

    def coefficients(self, u, ux, uxx):
        arrs = [np.zeros_like(u), np.zeros_like(u), np.zeros_like(u)]  # c, b, a
        for order, cv in self.lin:
            arrs[order] = arrs[order] + cv
        states = (u, ux, uxx)
        for mono, cv in self.monos:
            powers = list(mono.powers)
            top = max(i for i, p in enumerate(powers) if p > 0)
            powers[top] -= 1
            frozen = cv.copy()
            for st, p in zip(states, powers):
                if p:
                    frozen = frozen * st ** p
            arrs[top] = arrs[top] + frozen
        c, b, a = (self.sign * v for v in arrs)
        return a, b, c

    def forcing(self, t):
        out = np.zeros_like(self.xs)
        for p, cv in self.source:
            out = out + cv * (t ** p if p else 1.0)
        return out


def _check_finite(vals, where):
    if not np.all(np.isfinite(vals)) or np.max(np.abs(vals)) > DIVERGENCE_LIMIT:
        raise DivergenceError(f"solution blew up at {where}")


# ---------------------------------------------------------------------------


def fdm_l1_solve(problem, Nx=100, Nt=100, T=1.0, boundary=None):
    """L1 finite-difference solution on ``Nx`` x ``Nt`` intervals up to ``T``."""
    if Nx < 8 or Nt < 8:
        raise ValidationError("grid", "Nx and Nt must be at least 8")
    if not T > 0:
        raise ValidationError("T", "must be positive")
    alpha = problem.alpha
    lo, hi = problem.domain
    xs = np.linspace(lo, hi, Nx + 1)
    ts = np.linspace(0.0, T, Nt + 1)
    h = xs[1] - xs[0]
    dt = ts[1] - ts[0]
    kappa = gamma(2.0 - alpha) * dt ** alpha
    b = kn.l1_weights(Nt, alpha)
    g = boundary or boundary_function(problem)
    op = _Operator(problem, xs)

    levels = np.empty((Nt + 1, Nx + 1))
    levels[0] = ex.evaluate_array(problem.ic, xs)
    _check_finite(levels[0], "t=0")
    lower = np.zeros(Nx + 1)
    upper = np.zeros(Nx + 1)
    diag = np.ones(Nx + 1)
    for k in range(Nt):
        u = levels[k]
        ux = np.zeros_like(u)
        uxx = np.zeros_like(u)
        ux[1:-1] = (u[2:] - u[:-2]) / (2 * h)
        uxx[1:-1] = (u[2:] - 2 * u[1:-1] + u[:-2]) / (h * h)
        a, bc, c = (v[1:-1] for v in op.coefficients(u, ux, uxx))
        if np.any(a < 0):
            raise StabilityError(f"negative diffusion coefficient at step {k + 1}; the frozen problem is ill-posed")
        d = 1.0 - kappa * c + 2.0 * kappa * a / (h * h)
        if np.any(d <= 0):
            raise StabilityError(f"step too large at step {k + 1}: reaction term dominates (reduce T/Nt)")
        diag[1:-1] = d
        lower[1:-1] = -kappa * (a / (h * h) - bc / (2 * h))
        upper[1:-1] = -kappa * (a / (h * h) + bc / (2 * h))
        rhs = np.empty(Nx + 1)
        rhs[1:-1] = u[1:-1] - kn.l1_history(levels[:, 1:-1], b, k) + kappa * op.forcing(ts[k + 1])[1:-1]
        gb = g(np.array([lo, hi]), ts[k + 1])
        rhs[0], rhs[-1] = gb[0], gb[1]
        levels[k + 1] = kn.thomas_solve(lower, diag, upper, rhs)
        _check_finite(levels[k + 1], f"t={ts[k + 1]:.6g}")
    meta = {"scheme": "L1/central", "Nx": Nx, "Nt": Nt, "T": T, "backend": kn.backend()}
    return GridSolution(xs, ts, levels.T.copy(), alpha, meta)


def _condition(M, eps):
    cond = float(np.linalg.cond(M))
    if not np.isfinite(cond) or cond > COND_LIMIT:
        raise IllConditionedError(cond, eps, suggestion=eps * 0.8)  # narrower width
    return cond


def rbf_collocation_solve(problem, N=100, eps=0.1, Nt=100, T=1.0, boundary=None):
    """Gaussian-RBF Kansa collocation with L1 time stepping.

    ``eps`` is the Gaussian width: ``phi(r) = exp(-(r/eps)^2)``.  ``Nt = 0``
    gives interpolation of the initial condition only.
    """
    if N < 5:
        raise ValidationError("N", "need at least 5 centers")
    if Nt < 0 or not T > 0:
        raise ValidationError("time grid", "need Nt >= 0 and T > 0")
    alpha = problem.alpha
    lo, hi = problem.domain
    xc = np.linspace(lo, hi, N)
    A, Ax, Axx = kn.gaussian_matrices(xc, xc, eps)
    cond = _condition(A, eps)
    u0 = ex.evaluate_array(problem.ic, xc)
    lam = np.empty((Nt + 1, N))
    lam[0] = np.linalg.solve(A, u0)
    ts = np.linspace(0.0, T, Nt + 1)
    if Nt == 0:
        return RBFSolution(xc, eps, ts, lam, alpha, cond)

    dt = ts[1] - ts[0]
    kappa = gamma(2.0 - alpha) * dt ** alpha
    b = kn.l1_weights(Nt, alpha)
    g = boundary or boundary_function(problem)
    op = _Operator(problem, xc)
    vals = np.empty((Nt + 1, N))
    vals[0] = A @ lam[0]
    for k in range(Nt):
        a, bc, c = op.coefficients(vals[k], Ax @ lam[k], Axx @ lam[k])
        if np.any(a[1:-1] < 0):
            raise StabilityError(f"negative diffusion coefficient at step {k + 1}; the frozen problem is ill-posed")
        M = A - kappa * (a[:, None] * Axx + bc[:, None] * Ax + c[:, None] * A)
        M[0], M[-1] = A[0], A[-1]
        rhs = vals[k] - kn.l1_history(vals, b, k) + kappa * op.forcing(ts[k + 1])
        gb = g(np.array([lo, hi]), ts[k + 1])
        rhs[0], rhs[-1] = gb[0], gb[1]
        if k == 0:
            _condition(M, eps)
        lam[k + 1] = np.linalg.solve(M, rhs)
        vals[k + 1] = A @ lam[k + 1]
        _check_finite(vals[k + 1], f"t={ts[k + 1]:.6g}")
    return RBFSolution(xc, eps, ts, lam, alpha, cond)


def residual_norm(problem, sol, x_samples, t_samples):
    """``max |D^a S - RHS(S)|`` over the sample grid, with ``S`` the partial sum."""
    xs = np.atleast_1d(np.asarray(x_samples, dtype=float))
    ts = np.atleast_1d(np.asarray(t_samples, dtype=float))
    lo, hi = problem.domain
    if np.any(ts <= 0):
        raise ValidationError("t_samples", "must be positive")
    if np.any(xs < lo) or np.any(xs > hi):
        raise ValidationError("x_samples", f"must lie in {problem.domain}")
    r = residual_series(problem, sol.partial_sum)
    if not r:
        return 0.0
    return float(np.max(np.abs(fs.evaluate_grid(r, xs, ts))))


def fill_distance(centers, domain=None):
    """Largest distance from a point of ``domain`` to its nearest center.

    Exact in one dimension: half the largest gap, or the distance from an
    end of the domain to the outermost center.
    """
    c = np.sort(np.asarray(centers, dtype=float))
    if c.size < 2:
        raise ValidationError("centers", "need at least 2 centers")
    lo, hi = (c[0], c[-1]) if domain is None else domain
    gaps = np.diff(c) / 2.0
    return float(max(gaps.max(), c[0] - lo, hi - c[-1]))


__all__ = [
    "GridSolution", "RBFSolution", "fdm_l1_solve", "rbf_collocation_solve",
    "residual_norm", "fill_distance", "boundary_function",
]
