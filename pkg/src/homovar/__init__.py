"""Spectral variance analysis for homogeneous Monte Carlo integration."""
__version__ = "0.1.0"

from ._kernels import BACKEND  # noqa: E402
