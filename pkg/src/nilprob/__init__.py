"""Degrees of k-step nilpotence and equation satisfiability over groups."""

__version__ = "0.1.0"
