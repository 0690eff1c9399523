"""Deterministic side: Stieltjes-equation solvers, densities, corrections."""

from .corrections import CorrectionTerm, corrections, directional_derivative
from .density import SpectralDensityEstimate, density, neville_to_zero, support_of
from .norms import norm_prediction
from .solver import (
    SEMICIRCULAR,
    FreeModel,
    SolverError,
    SpectralParameter,
    StieltjesSolution,
    equation_residual,
    g_scalar,
    marchenko_pastur,
    s_norm_bound,
    solve_G,
)

__all__ = [
    "CorrectionTerm", "corrections", "directional_derivative",
    "SpectralDensityEstimate", "density", "neville_to_zero", "support_of",
    "norm_prediction",
    "SEMICIRCULAR", "FreeModel", "SolverError", "SpectralParameter",
    "StieltjesSolution", "equation_residual", "g_scalar", "marchenko_pastur",
    "s_norm_bound", "solve_G",
]
