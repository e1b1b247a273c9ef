"""Exact samplers for discrete determinantal point processes."""

__version__ = "1.0.0"
