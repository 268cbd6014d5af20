"""Simulation and spectral analysis of preferential-attachment networks under targeted attack."""

__version__ = "0.1.0"
