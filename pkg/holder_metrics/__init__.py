"""Numerical toolkit for unbounded Hölder domains on the Riemann sphere"""

__version__ = "1.0.0"
