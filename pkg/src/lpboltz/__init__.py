"""Deterministic velocity-grid harness for the spatially homogeneous Boltzmann
operator and its weighted L^p a priori estimates."""

__version__ = "0.1.0"
