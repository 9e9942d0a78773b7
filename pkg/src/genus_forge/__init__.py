"""Exact characteristic classes, modular forms and super determinants."""

__version__ = "0.1.0"
