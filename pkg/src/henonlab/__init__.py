"""Radial numerical laboratory for -Delta u = alpha(x) u^p + kappa mu in R^N."""

__version__ = "0.1.0"
