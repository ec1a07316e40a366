"""High-order asymptotic-preserving micro-macro solvers for 1D kinetic equations."""

__version__ = "0.1.0"
