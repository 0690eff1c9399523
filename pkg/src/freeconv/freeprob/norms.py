"""Operator-norm prediction for polynomials in the free generators.

The polynomial is linearized into a Hermitian pencil; the distribution of
p(x) is then read off the pencil's output corner of G and its support is
detected with the density machinery.  For a faithful trace the support of
that distribution equals the spectrum, so the predicted norm is the largest
absolute support endpoint.
"""

from __future__ import annotations

import numpy as np

from ..linearize import linearize
from ..ncpoly import NCPolynomial, adjoint
from .density import density


def _edge_floor_for(tol):
    # Outside the support the extrapolated corner density decays like
    # y^3 / delta^{5/2}; inverting the cutoff crossing gives the ladder
    # floor needed for an edge bias below tol/2.
    f = ((tol / 2.0) ** 2.5 / 159.0) ** (1.0 / 3.0)
    return float(min(2e-3, max(1e-4, f)))


def norm_prediction(p: NCPolynomial, model, tol=1e-3, solver_tol=1e-10):
    """Predicted limiting operator norm of p evaluated on the free generators."""
    if p.degree == 0:
        return abs(p.coefficient(()))
    if not p.is_self_adjoint():
        return float(np.sqrt(norm_prediction(adjoint(p) * p, model, tol=tol,
                                             solver_tol=solver_tol)))

    lin = linearize(p)
    bound = sum(abs(c) * model.edge ** len(w) for w, c in p.terms.items()) + 0.25
    step = max(0.02, (2 * bound) / 400)
    grid = np.arange(-bound, bound + step, step)
    est = density(lin.pencil, model, grid, tol=solver_tol, slot=lin.output_slot,
                  refine=True, edge_floor=_edge_floor_for(tol))
    if not est.support:
        raise RuntimeError("no support detected for the polynomial's distribution")
    return max(abs(e) for interval in est.support for e in interval)
