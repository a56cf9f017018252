"""Satisfiability toolkit for the BD and ABD interval logics under homogeneity."""

__version__ = "0.1.0"
