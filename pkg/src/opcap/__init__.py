"""Capacity bounds and norm inequalities for VN-channels, checked numerically."""

__version__ = "0.1.0"
