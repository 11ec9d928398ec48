"""Certified numerical checks of Brunn-Minkowski type inequalities on lattice cell sets."""

__version__ = "0.1.0"
