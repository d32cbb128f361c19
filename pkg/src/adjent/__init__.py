"""Adjoint algebraic entropy: exact growth engines, duality checks and a zero-or-infinity classifier."""

__version__ = "0.1.0"
