"""Exact finite-precision algebra for topological cyclic homology of perfectoid rings."""

__version__ = "0.1.0"
