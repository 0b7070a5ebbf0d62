"""Numerical and symbolic laboratory for circle-symmetric Fano metric
flows, anticanonical section densities, and exact local thresholds of
plane curve germs."""

__version__ = "0.1.0"
