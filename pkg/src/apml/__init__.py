"""Toolchain for timed architecture contracts: parsing, proof checking,
Isabelle script emission and finite-domain simulation."""

__version__ = "0.1.0"
