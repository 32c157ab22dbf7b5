"""Exact toolkit for symplectic half-flat structures on invariant coframes."""

__version__ = "0.1.0"
