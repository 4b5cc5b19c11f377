"""Homotopy perturbation Sumudu transform and Adomian decomposition solvers
for time-fractional nonlinear PDEs, with finite-difference and RBF
comparators."""

__version__ = "0.1.0"
