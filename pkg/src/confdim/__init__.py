"""Conformal dimension toolkit for symmetric Laakso-type spaces."""

__version__ = "0.1.0"
