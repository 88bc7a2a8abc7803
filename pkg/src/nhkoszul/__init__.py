"""Exact Koszul duality computations for non-homogeneous quadratic algebras."""

__version__ = "0.1.0"
