"""Solvability analysis for constant-coefficient differential operators."""

__version__ = "0.1.0"
