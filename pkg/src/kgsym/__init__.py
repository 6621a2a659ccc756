"""Lie and Noether point symmetries of the Klein-Gordon equation on Bianchi I spacetimes."""

__version__ = "0.1.0"
