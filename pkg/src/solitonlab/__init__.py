"""Numerical laboratory for cohomogeneity-one gradient Ricci soliton trajectories."""

__version__ = "0.1.0"
