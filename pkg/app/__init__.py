"""Exact tree amplitudes of field diffeomorphisms."""

__version__ = "1.0.0"
