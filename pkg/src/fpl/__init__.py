"""Frequency-principle laboratory: networks, spectral diagnostics, solvers."""

__version__ = "0.1.0"
