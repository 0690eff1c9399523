"""freeconv: operator-valued Stieltjes solvers plus a random-matrix
verification harness for spectra and norms of polynomials in free
semicircular / Marchenko-Pastur generators."""

__version__ = "0.1.0"

from .ncpoly import CoefficientPencil, NCPolynomial, adjoint, evaluate, parse, render
from .linearize import LinearizationResult, linearize

__all__ = [
    "CoefficientPencil", "NCPolynomial", "adjoint", "evaluate", "parse", "render",
    "LinearizationResult", "linearize",
    "__version__",
]
