"""Exact verification of supercongruences for the (p-1)th Apery numbers."""

__version__ = "0.1.0"
