"""Simulator for complete hyperentangled Bell-state analysis with cross-Kerr probes."""

__version__ = "0.1.0"
