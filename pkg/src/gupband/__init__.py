"""One-dimensional bandlimited quantum mechanics with a GUP-induced wavevector cutoff."""
from .deformation import BUILTIN_NAMES, Deformation, ModelParams, builtin
from .numerics import DomainError, NumericalError, OutOfBandError

__all__ = ["BUILTIN_NAMES", "Deformation", "ModelParams", "builtin", "DomainError",
           "NumericalError", "OutOfBandError"]
__version__ = "0.1.0"
