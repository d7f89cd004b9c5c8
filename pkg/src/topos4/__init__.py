"""Finite workbench for topological semantics of S4 and its extensions."""

__version__ = "0.1.0"
