"""Directional derivative of G and the fourth-cumulant correction terms.

Differentiating the semicircular equation in lambda along a direction h
gives the m^2-dimensional linear system

    DG - G (sum_i a_i DG a_i) G = -G h G,

and the analogous system for the MP model.  The first-order correction pair
is

    R = (kappa4 / 2) sum_i a_i G a_i G a_i G a_i G,
    L = -DG[R G^{-1}],

the sign fixed by the resolvent-derivative identity R'(z).A = R(z) A R(z).
Both satisfy the conjugate symmetry L(lambda*) = L(lambda)*.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .solver import SolverError, SpectralParameter, solve_G

# L is only evaluated where the defining integral representation is
# numerically trustworthy; requests closer to the real axis are refused.
IM_INV_NORM_LIMIT = 100.0


@dataclass(frozen=True)
class CorrectionTerm:
    R: np.ndarray
    L: np.ndarray
    kappa4: float


def directional_derivative(pencil, model, lam, h, tol=1e-11, G=None):
    """DG(lambda)[h] from the linearized fixed-point equation.

    ``G`` may be a pre-solved transform at lambda; otherwise it is solved to
    ``tol``.  Raises SolverError if the base solve fails or the linearized
    system is singular.
    """
    lam = SpectralParameter.wrap(lam, m=pencil.m)
    h = np.asarray(h, dtype=complex)
    if lam.half_plane == "lower":
        upper = SpectralParameter(lam.matrix.conj().T, "upper")
        out = directional_derivative(pencil, model, upper, h.conj().T, tol=tol,
                                     G=None if G is None else G.conj().T)
        return out.conj().T
    if G is None:
        sol = solve_G(pencil, model, lam, tol=tol)
        if not sol.converged:
            raise SolverError("base solve did not converge; cannot differentiate")
        G = sol.G

    m = pencil.m
    eye_m = np.eye(m)
    M = np.eye(m * m, dtype=complex)
    if model.kind == "semicircular":
        for a in pencil.a:
            M -= np.kron(G @ a, (a @ G).T)
    else:
        for a in pencil.a:
            K = np.linalg.solve(eye_m - a @ G, a)   # (1 - aG)^{-1} a
            M -= model.alpha * np.kron(G @ K, (K @ G).T)
    rhs = (-G @ h @ G).reshape(m * m)
    try:
        dg = np.linalg.solve(M, rhs)
    except np.linalg.LinAlgError as exc:
        raise SolverError("linearized system is singular") from exc
    return dg.reshape(m, m)


def corrections(pencil, lam, kappa4, tol=1e-11):
    """Correction pair (R, L) at lambda for the semicircular model."""
    from .solver import SEMICIRCULAR

    lam = SpectralParameter.wrap(lam, m=pencil.m)
    if lam.im_inv_norm > IM_INV_NORM_LIMIT:
        raise ValueError(
            f"||Im(lambda)^-1|| = {lam.im_inv_norm:.3g} exceeds the supported "
            f"range {IM_INV_NORM_LIMIT}; corrections are not evaluated there")
    if lam.half_plane == "lower":
        upper = SpectralParameter(lam.matrix.conj().T, "upper")
        out = corrections(pencil, upper, kappa4, tol=tol)
        return CorrectionTerm(out.R.conj().T, out.L.conj().T, out.kappa4)

    sol = solve_G(pencil, SEMICIRCULAR, lam, tol=tol)
    if not sol.converged:
        raise SolverError("solve_G did not converge; corrections unavailable")
    G = sol.G
    R = np.zeros_like(G)
    for a in pencil.a:
        R += a @ G @ a @ G @ a @ G @ a @ G
    R = 0.5 * kappa4 * R
    if kappa4 == 0.0:
        return CorrectionTerm(np.zeros_like(G), np.zeros_like(G), 0.0)
    RGinv = np.linalg.solve(G.T, R.T).T    # R G^{-1}
    L = -directional_derivative(pencil, SEMICIRCULAR, lam, RGinv, tol=tol, G=G)
    return CorrectionTerm(R, L, float(kappa4))
