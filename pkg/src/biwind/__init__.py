"""Rigorous numerics for the supercritical equivariant biharmonic map ODE."""

__version__ = "0.1.0"
