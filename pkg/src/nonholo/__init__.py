"""Nonholonomic point-mass dynamics in Voronec form with independent cross-checks."""

__version__ = "0.1.0"
