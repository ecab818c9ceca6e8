"""Exact manipulability analysis of Condorcet-consistent tournament rules."""

__version__ = "0.1.0"
