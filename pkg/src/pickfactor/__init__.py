"""Subinner/free outer factorization and Pick interpolation in complete Pick spaces."""

__version__ = "0.1.0"
