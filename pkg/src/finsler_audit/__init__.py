"""Numerical audit of weighted Bochner-type inequalities on Finsler charts."""
from ._kernels import BACKEND

__version__ = "0.1.0"

__all__ = ["BACKEND", "__version__"]
