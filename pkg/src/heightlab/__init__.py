"""Canonical heights and orbit structure for arithmetic dynamical systems."""

__version__ = "0.1.0"
