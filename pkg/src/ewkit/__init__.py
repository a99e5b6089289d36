"""Generalized reduction and Robertson positive maps, their witnesses and certificates."""

__version__ = "0.1.0"
