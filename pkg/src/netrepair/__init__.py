"""Synthetic misconfiguration benchmark: generation, simulation and scoring."""

__version__ = "0.1.0"
