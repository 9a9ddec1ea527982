"""Proof-search workbench for pure type sequent calculi with meta-variables."""

__version__ = "0.1.0"
