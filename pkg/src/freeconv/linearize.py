"""Self-adjoint linearization of *-polynomials into Hermitian pencils.

A self-adjoint polynomial p of degree >= 1 is encoded as a Hermitian pencil
(A0, ..., Ar) of size m together with an output slot, here fixed to the
(1,1) corner: for every Hermitian tuple X and every z,

    z is an eigenvalue of p(X)   <=>   z * E11 (x) 1 - (A0 (x) 1 + sum Ai (x) Xi)
                                       is singular.

Construction (Schur complement): write p = affine(x) + sum_j c_j w_j over
words of degree >= 2.  Each word x_{i1}...x_{id} factors through a chain of
auxiliary slots carried by an always-invertible upper-triangular block Q
with -1 diagonal, giving w = -u Q^{-1} v with u, v, Q affine in x.  Stacking
the strips and symmetrizing with the half coefficients,

    L = [[affine, U, V*], [U*, 0, Q*], [V, Q, 0]],

the (1,1) Schur complement of z - L is exactly z - p(x).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .ncpoly import CoefficientPencil, NCPolynomial, adjoint


@dataclass(frozen=True)
class LinearizationResult:
    pencil: CoefficientPencil
    output_slot: tuple  # (row, col) of the spectral-variable corner, 0-based
    degree: int


def linearize(p: NCPolynomial) -> LinearizationResult:
    """Linearize a self-adjoint polynomial of degree >= 1."""
    if not p.is_self_adjoint():
        raise ValueError("polynomial is not self-adjoint; linearize p*p instead")
    deg = p.degree
    if deg < 1:
        raise ValueError("degree-0 polynomial has no pencil; its norm is |constant|")

    r = p.num_generators
    high = [(w, c) for w, c in p.terms.items() if len(w) >= 2]
    k = sum(len(w) - 1 for w, _ in high)
    m = 1 + 2 * k

    # A[i] is the coefficient of x_i (A[0] the constant part).
    A = [np.zeros((m, m), dtype=complex) for _ in range(r + 1)]

    const = p.coefficient(())
    A[0][0, 0] = const.real
    for g in range(1, r + 1):
        beta = p.coefficient((g,))
        A[g][0, 0] = beta.real

    # Strips: U occupies columns 1..k, V and Q occupy columns 1+k..2k.
    col = 0
    for w, c in high:
        d = len(w)
        u_cols = range(1 + col, 1 + col + d - 1)
        v_rows = range(1 + k + col, 1 + k + col + d - 1)
        u0 = 1 + col
        # U entry: (c/2) * x_{first letter} in the strip's first column.
        half = c / 2.0
        A[w[0]][0, u0] += half
        A[w[0]][u0, 0] += np.conj(half)
        # V entry: x_{last letter} in the strip's last row.
        vlast = 1 + k + col + d - 2
        A[w[-1]][vlast, 0] += 1.0
        A[w[-1]][0, vlast] += 1.0
        # Q: -1 on the diagonal, x_{i2}, ..., x_{i_{d-1}} on the superdiagonal.
        for j in range(d - 1):
            A[0][1 + k + col + j, 1 + col + j] += -1.0
            A[0][1 + col + j, 1 + k + col + j] += -1.0
        for j in range(d - 2):
            g = w[1 + j]
            A[g][1 + k + col + j, 1 + col + j + 1] += 1.0
            A[g][1 + col + j + 1, 1 + k + col + j] += 1.0
        col += d - 1

    pencil = CoefficientPencil(m, tuple(A))
    return LinearizationResult(pencil=pencil, output_slot=(0, 0), degree=deg)


def lambda_matrix(z, m, output_slot=(0, 0)):
    """The spectral-variable matrix with z in the output slot and 0 elsewhere."""
    lam = np.zeros((m, m), dtype=complex)
    lam[output_slot] = z
    return lam


def assemble(pencil: CoefficientPencil, matrices) -> np.ndarray:
    """a0 (x) 1_n + sum_p a_p (x) X_p as a dense mn x mn Hermitian matrix."""
    matrices = [np.asarray(x, dtype=complex) for x in matrices]
    if len(matrices) != pencil.r:
        raise ValueError(f"pencil has r={pencil.r} but {len(matrices)} matrices given")
    n = matrices[0].shape[0] if matrices else 1
    out = np.kron(pencil.a0, np.eye(n, dtype=complex))
    for a, x in zip(pencil.a, matrices):
        out += np.kron(a, x)
    return out


def pencil_eigenvalues(lin: LinearizationResult, matrices, inf_cutoff=1e8):
    """Finite generalized eigenvalues of (L(X), E_slot (x) 1_n).

    By the correspondence contract these are exactly the eigenvalues of
    p(X), with multiplicity.
    """
    matrices = [np.asarray(x, dtype=complex) for x in matrices]
    n = matrices[0].shape[0]
    L = assemble(lin.pencil, matrices)
    B = np.kron(lambda_matrix(1.0, lin.pencil.m, lin.output_slot), np.eye(n, dtype=complex))
    w = scipy.linalg.eig(L, B, right=False)
    finite = w[np.isfinite(w) & (np.abs(w) < inf_cutoff)]
    return np.sort(finite.real)
