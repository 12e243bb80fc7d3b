"""Momentum-space gauge fields, non-commutative coordinates and doubly gauged Landau levels."""

__version__ = "0.1.0"
