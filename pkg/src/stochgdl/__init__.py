"""Exact solving of two-player stochastic turn-taking GDL games."""

__version__ = "0.1.0"
