"""Integrability tests and Poincare sections for the AGK Hamiltonian

    H = (px^2 + py^2)/2 - mu (x^2 + y^2)/2 - a (x^2 + y^2)^2/4 - b x^2 y^2/2.
"""
from .core import Params, PhaseState, energy, potential
from .galois import Level, Verdict, classify

__all__ = ["Params", "PhaseState", "energy", "potential", "Level", "Verdict", "classify"]
__version__ = "0.1.0"
