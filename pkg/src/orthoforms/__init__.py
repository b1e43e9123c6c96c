"""Reflective modular forms on lattices of signature (2, n) via Jacobi forms."""

__version__ = "0.1.0"
