"""Fixed-point solvers for the operator-valued Stieltjes transform G(lambda).

Two generator models are supported.  With pencil coefficients (a0, ..., ar)
and a matrix spectral parameter lambda with positive-definite imaginary
part, G solves

    semicircular:      sum_i a_i G a_i + (a0 - lambda) + G^{-1} = 0
    marchenko_pastur:  a0 + alpha * sum_i (1 - a_i G)^{-1} a_i + G^{-1} = lambda

The damped iteration G <- (1-theta) G + theta T(G) with the rearranged maps

    T(G) = (lambda - a0 - sum_i a_i G a_i)^{-1}
    T(G) = (lambda - a0 - alpha * sum_i (1 - a_i G)^{-1} a_i)^{-1}

is run from G0 = (lambda - a0)^{-1}; if it stalls, a continuation ladder in
the imaginary shift lambda + i t 1_m (t decreasing from 10) restarts it with
warm iterates, which also pins the Stieltjes branch of the MP equation.
Lower-half-plane parameters are handled by the symmetry G(lambda*) = G(lambda)*.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..ncpoly import CoefficientPencil


class SolverError(RuntimeError):
    """Singular intermediate or other failure that valid inputs cannot produce."""


@dataclass(frozen=True)
class FreeModel:
    """Distribution of the free generators: semicircular or Marchenko-Pastur."""

    kind: str
    alpha: float | None = None

    def __post_init__(self):
        if self.kind not in ("semicircular", "marchenko_pastur"):
            raise ValueError(f"unknown model kind {self.kind!r}")
        if self.kind == "marchenko_pastur":
            if self.alpha is None or self.alpha < 1:
                raise ValueError("marchenko_pastur requires alpha >= 1")
        elif self.alpha is not None:
            raise ValueError("alpha is only meaningful for marchenko_pastur")

    @property
    def edge(self):
        """Right edge of the generator's spectrum (2, or (sqrt(alpha)+1)^2)."""
        if self.kind == "semicircular":
            return 2.0
        return (np.sqrt(self.alpha) + 1.0) ** 2

    @property
    def support(self):
        if self.kind == "semicircular":
            return (-2.0, 2.0)
        return ((np.sqrt(self.alpha) - 1.0) ** 2, self.edge)


SEMICIRCULAR = FreeModel("semicircular")


def marchenko_pastur(alpha):
    return FreeModel("marchenko_pastur", alpha=float(alpha))


@dataclass(frozen=True)
class SpectralParameter:
    """m x m spectral parameter with definite imaginary part.

    ``im_inv_norm`` records ||Im(lambda)^{-1}|| = 1 / min |eig(Im lambda)|.
    """

    matrix: np.ndarray
    half_plane: str
    im_inv_norm: float = field(init=False)

    def __post_init__(self):
        lam = np.array(self.matrix, dtype=complex)
        if lam.ndim != 2 or lam.shape[0] != lam.shape[1]:
            raise ValueError("lambda must be a square matrix")
        lam.setflags(write=False)
        object.__setattr__(self, "matrix", lam)
        im = (lam - lam.conj().T) / 2j
        eigs = np.linalg.eigvalsh(im)
        if self.half_plane == "upper":
            if eigs.min() <= 0:
                raise ValueError("Im(lambda) must be positive definite for the upper half-plane")
            object.__setattr__(self, "im_inv_norm", float(1.0 / eigs.min()))
        elif self.half_plane == "lower":
            if eigs.max() >= 0:
                raise ValueError("Im(lambda) must be negative definite for the lower half-plane")
            object.__setattr__(self, "im_inv_norm", float(1.0 / -eigs.max()))
        else:
            raise ValueError(f"unknown half_plane {self.half_plane!r}")

    @property
    def m(self):
        return self.matrix.shape[0]

    @classmethod
    def wrap(cls, lam, m=None):
        """Coerce a matrix or complex scalar, inferring the half-plane."""
        if isinstance(lam, SpectralParameter):
            return lam
        if np.isscalar(lam):
            if m is None:
                raise ValueError("m is required to wrap a scalar parameter")
            lam = complex(lam) * np.eye(m)
        lam = np.asarray(lam, dtype=complex)
        im = (lam - lam.conj().T) / 2j
        eigs = np.linalg.eigvalsh(im)
        if eigs.min() > 0:
            return cls(lam, "upper")
        if eigs.max() < 0:
            return cls(lam, "lower")
        raise ValueError("Im(lambda) is not definite; not a valid spectral parameter")


@dataclass(frozen=True)
class StieltjesSolution:
    G: np.ndarray
    residual_norm: float
    iterations: int
    converged: bool


def _opnorm(a):
    return float(np.linalg.norm(a, 2))


def equation_residual(pencil, model, lam_matrix, G):
    """Operator-norm residual of the defining equation, evaluated directly."""
    a0, coeffs = pencil.a0, pencil.a
    Ginv = np.linalg.inv(G)
    if model.kind == "semicircular":
        acc = sum((a @ G @ a for a in coeffs), np.zeros_like(G))
        return _opnorm(acc + a0 - lam_matrix + Ginv)
    eye = np.eye(pencil.m)
    acc = np.zeros_like(G)
    for a in coeffs:
        acc += np.linalg.solve(eye - a @ G, a)
    return _opnorm(a0 + model.alpha * acc + Ginv - lam_matrix)


def _fixed_point_map(pencil, model, lam_matrix):
    a0, coeffs = pencil.a0, pencil.a
    eye = np.eye(pencil.m)
    if model.kind == "semicircular":
        def T(G):
            acc = sum((a @ G @ a for a in coeffs), np.zeros_like(G))
            return np.linalg.inv(lam_matrix - a0 - acc)
    else:
        alpha = model.alpha
        def T(G):
            acc = np.zeros_like(G)
            for a in coeffs:
                acc += np.linalg.solve(eye - a @ G, a)
            return np.linalg.inv(lam_matrix - a0 - alpha * acc)
    return T


def _iterate(pencil, model, lam_matrix, G0, tol, max_iter, theta):
    T = _fixed_point_map(pencil, model, lam_matrix)
    G = G0
    best, best_res = G0, np.inf
    stale = 0
    for it in range(1, max_iter + 1):
        try:
            G = (1.0 - theta) * G + theta * T(G)
            res = equation_residual(pencil, model, lam_matrix, G)
        except np.linalg.LinAlgError as exc:
            raise SolverError(f"singular intermediate matrix at iteration {it}") from exc
        if not np.isfinite(res):
            raise SolverError(f"non-finite residual at iteration {it}")
        if res < best_res:
            if res > 0.999 * best_res:
                stale += 1
            else:
                stale = 0
            best, best_res = G, res
        else:
            stale += 1
        if res <= tol:
            return G, res, it, True
        if stale > 200:
            return best, best_res, it, False
    return best, best_res, max_iter, False


def solve_G(pencil, model, lam, tol=1e-10, max_iter=200_000, theta=0.5, G0=None):
    """Solve the model's Stieltjes equation at a spectral parameter.

    Returns the best iterate with ``converged=False`` when max_iter is
    exhausted; residuals are operator norms of the defining equation.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    lam = SpectralParameter.wrap(lam, m=pencil.m)
    if lam.m != pencil.m:
        raise ValueError(f"lambda has size {lam.m}, pencil has m={pencil.m}")
    if lam.half_plane == "lower":
        upper = SpectralParameter(lam.matrix.conj().T, "upper")
        sol = solve_G(pencil, model, upper, tol=tol, max_iter=max_iter, theta=theta,
                      G0=None if G0 is None else G0.conj().T)
        return StieltjesSolution(sol.G.conj().T, sol.residual_norm, sol.iterations, sol.converged)

    lam_m = lam.matrix
    if G0 is None:
        try:
            G0 = np.linalg.inv(lam_m - pencil.a0)
        except np.linalg.LinAlgError as exc:
            raise SolverError("lambda - a0 is singular") from exc

    total_iters = 0
    G, res, it, ok = _iterate(pencil, model, lam_m, G0, tol, max_iter, theta)
    total_iters += it
    if ok:
        return StieltjesSolution(G, res, total_iters, True)

    # Continuation in the imaginary shift, warm-starting each rung.
    eye = np.eye(pencil.m)
    shifts = []
    t = 10.0
    floor = min(0.05, 0.5 / max(lam.im_inv_norm, 1.0))
    while t > floor:
        shifts.append(t)
        t /= 2.0
    shifts.append(0.0)
    per_rung = max(2000, max_iter // (len(shifts) + 1))
    G = np.linalg.inv(lam_m + 10j * eye - pencil.a0)
    for t in shifts:
        G, res, it, ok = _iterate(pencil, model, lam_m + 1j * t * eye, G, tol, per_rung, theta)
        total_iters += it
    return StieltjesSolution(G, res, total_iters, ok)


def g_scalar(pencil, model, z, tol=1e-10):
    """Normalized trace tr_m(G(z 1_m)) for a complex z off the real axis."""
    z = complex(z)
    if z.imag == 0:
        raise ValueError("z must have nonzero imaginary part")
    sol = solve_G(pencil, model, z * np.eye(pencil.m), tol=tol)
    return complex(np.trace(sol.G) / pencil.m)


def s_norm_bound(pencil, model):
    """Computable bound ||a0|| + sum ||a_i|| * edge for ||s||."""
    norms = pencil.coefficient_norms()
    return norms[0] + model.edge * sum(norms[1:])
