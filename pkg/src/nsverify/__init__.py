"""Numerical verification of noiseless subsystems and decoherence-free subspaces."""

__version__ = "0.1.0"
