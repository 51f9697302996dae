"""Sampling-based zeroth-order global optimization toolkit."""

__version__ = "0.1.0"
