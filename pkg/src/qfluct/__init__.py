"""Numerical laboratory for generalized quantum fluctuation theorems."""

__version__ = "0.1.0"
