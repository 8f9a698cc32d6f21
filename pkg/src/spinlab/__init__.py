"""Spin geometry calculus for metric connections with skew torsion."""

__version__ = "0.1.0"
