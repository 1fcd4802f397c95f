"""Variational probe-state optimization for directional phase sensing on spin registers."""

__version__ = "0.1.0"
