"""Quantum privacy quantities and their trade-off / monogamy checks."""

__version__ = "0.1.0"
