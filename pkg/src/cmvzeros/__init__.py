"""Orthogonal polynomials on the unit circle from their Schur parameters.

Five-diagonal and Hessenberg matrix models, zeros as eigenvalues, zero bounds,
perturbation derivatives and the constant-parameter example.
"""

from .errors import CmvError
from .schur import SchurSequence, constant, load_json, validate

__version__ = "0.1.0"

__all__ = ["CmvError", "SchurSequence", "constant", "load_json", "validate", "__version__"]
