"""Numerical kernels for the grid and RBF comparators.

Each kernel has a pure-numpy version and, when numba is importable, a
compiled one.  Set ``HPSTM_DISABLE_NUMBA=1`` to force the numpy path.
"""

from __future__ import annotations

import os

import numpy as np

try:  # optional dependency
    import numba
except ImportError:  # pragma: no cover - exercised only without numba
    numba = None

DISABLE_ENV = "HPSTM_DISABLE_NUMBA"


def _flag_set():
    return os.environ.get(DISABLE_ENV, "").strip().lower() not in ("", "0", "false", "no")


def l1_weights(n, alpha):
    """``b_j = (j+1)^(1-a) - j^(1-a)`` for ``j = 0 .. n-1``."""
    j = np.arange(n + 1, dtype=float)
    p = j ** (1.0 - alpha)
    p[0] = 0.0  # 0**0 is 1 in floating point; the weight wants 0 at alpha = 1
    return p[1:] - p[:-1]


# --- numpy versions ---------------------------------------------------------


def l1_history_np(levels, b, k):
    """``sum_{j=1..k} b_j (U[k+1-j] - U[k-j])`` for stored levels ``U[0..k]``."""
    if k == 0:
        return np.zeros(levels.shape[1])
    diffs = levels[1:k + 1] - levels[:k]
    return b[k:0:-1] @ diffs


def thomas_np(lower, diag, upper, rhs):
    """Tridiagonal solve; ``lower[0]`` and ``upper[-1]`` are ignored."""
    n = diag.shape[0]
    c = np.empty(n)
    d = np.empty(n)
    c[0] = upper[0] / diag[0]
    d[0] = rhs[0] / diag[0]
    for i in range(1, n):
        m = diag[i] - lower[i] * c[i - 1]
        c[i] = upper[i] / m if i < n - 1 else 0.0
        d[i] = (rhs[i] - lower[i] * d[i - 1]) / m
    x = np.empty(n)
    x[-1] = d[-1]
    for i in range(n - 2, -1, -1):
        x[i] = d[i] - c[i] * x[i + 1]
    return x


def gaussian_np(xe, xc, eps):
    """Gaussian ``exp(-(r/eps)^2)`` and its first two x-derivatives."""
    d = xe[:, None] - xc[None, :]
    s = 1.0 / (eps * eps)
    phi = np.exp(-d * d * s)
    dphi = -2.0 * s * d * phi
    d2phi = (4.0 * s * s * d * d - 2.0 * s) * phi
    return phi, dphi, d2phi


# --- numba versions ---------------------------------------------------------

if numba is not None:

    @numba.njit(cache=True)
    def l1_history_nb(levels, b, k):
        m = levels.shape[1]
        out = np.zeros(m)
        for j in range(1, k + 1):
            w = b[j]
            hi = levels[k + 1 - j]
            lo = levels[k - j]
            for i in range(m):
                out[i] += w * (hi[i] - lo[i])
        return out

    @numba.njit(cache=True)
    def thomas_nb(lower, diag, upper, rhs):
        n = diag.shape[0]
        c = np.empty(n)
        d = np.empty(n)
        c[0] = upper[0] / diag[0]
        d[0] = rhs[0] / diag[0]
        for i in range(1, n):
            m = diag[i] - lower[i] * c[i - 1]
            c[i] = upper[i] / m if i < n - 1 else 0.0
            d[i] = (rhs[i] - lower[i] * d[i - 1]) / m
        x = np.empty(n)
        x[n - 1] = d[n - 1]
        for i in range(n - 2, -1, -1):
            x[i] = d[i] - c[i] * x[i + 1]
        return x

    @numba.njit(cache=True)
    def gaussian_nb(xe, xc, eps):
        ne, nc = xe.shape[0], xc.shape[0]
        s = 1.0 / (eps * eps)
        phi = np.empty((ne, nc))
        dphi = np.empty((ne, nc))
        d2phi = np.empty((ne, nc))
        for i in range(ne):
            for j in range(nc):
                d = xe[i] - xc[j]
                p = np.exp(-d * d * s)
                phi[i, j] = p
                dphi[i, j] = -2.0 * s * d * p
                d2phi[i, j] = (4.0 * s * s * d * d - 2.0 * s) * p
        return phi, dphi, d2phi

else:  # pragma: no cover
    l1_history_nb = thomas_nb = gaussian_nb = None


NUMPY = {"l1_history": l1_history_np, "thomas": thomas_np, "gaussian": gaussian_np}
NUMBA = (
    {"l1_history": l1_history_nb, "thomas": thomas_nb, "gaussian": gaussian_nb}
    if numba is not None else None
)


def backend():
    """Name of the active backend: ``"numba"`` or ``"numpy"``."""
    return "numba" if NUMBA is not None and not _flag_set() else "numpy"


def _impl(name):
    table = NUMBA if backend() == "numba" else NUMPY
    return table[name]


def l1_history(levels, b, k):
    return _impl("l1_history")(np.ascontiguousarray(levels, dtype=float), b, int(k))


def thomas_solve(lower, diag, upper, rhs):
    args = [np.ascontiguousarray(a, dtype=float) for a in (lower, diag, upper, rhs)]
    return _impl("thomas")(*args)


def gaussian_matrices(xe, xc, eps):
    xe = np.ascontiguousarray(xe, dtype=float)
    xc = np.ascontiguousarray(xc, dtype=float)
    return _impl("gaussian")(xe, xc, float(eps))
