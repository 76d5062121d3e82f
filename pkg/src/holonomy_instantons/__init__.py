"""Explicit G2 and Spin(7) instantons on the Bryant-Salamon manifolds, checked numerically."""

__version__ = "0.1.0"
