"""Julia set thermodynamics via Boettcher conjugacy series."""

__version__ = "0.1.0"
