"""Exact series, closed forms and form factors for lambda-extended Ising correlations."""

__version__ = "0.1.0"
