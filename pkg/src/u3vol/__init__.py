"""Exact index and volume computations for the rank-3 unramified unitary group."""

__version__ = "0.1.0"
