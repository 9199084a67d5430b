"""Exact and numerical verification of hyperlogarithmic identities on del Pezzo surfaces."""

__version__ = "0.1.0"
