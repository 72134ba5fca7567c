"""Exact K2 symbols on line-configuration curves and numerical regulators."""

__version__ = "0.1.0"
