"""Periodic-box embedding: spectral distributions, symbol operators and an embedded BVP solver."""

__version__ = "0.1.0"
