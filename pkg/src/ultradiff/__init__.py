"""Ultradifferentiable weight sequences, jets, diffeomorphisms of the line and
Hunter-Saxton geodesics."""

__version__ = "0.1.0"
