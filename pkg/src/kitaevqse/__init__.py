"""Statevector simulation and quantum subspace expansion for the honeycomb Kitaev model."""

__version__ = "0.1.0"
