"""Reconstruction, certification and simulation of OAM qutrit entanglement over fibre."""

__version__ = "0.1.0"
