"""Stieltjes inversion: spectral densities and support detection.

The density at x is recovered from -Im g(x + iy)/pi evaluated on a ladder
of decreasing imaginary offsets and polynomial-extrapolated to y -> 0
(Richardson/Neville on the recorded levels).  Support is detected as
maximal grid runs above a density cutoff, with interval endpoints refined
by bisection against a finer local ladder.

Two scalarizations are available: the normalized trace tr_m(G(z 1_m))
(the spectral measure of the pencil operator itself) and a single corner
entry of G at lambda = x E_ss + i y 1_m, which recovers the distribution
encoded in a linearization's output slot.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .solver import solve_G

NEGATIVITY_TOL = -1e-6


@dataclass(frozen=True)
class SpectralDensityEstimate:
    grid: np.ndarray
    density: np.ndarray
    y_levels: tuple
    support: tuple          # tuple of (lo, hi) pairs
    threshold: float
    preclamp_min: float     # most negative pre-clamp extrapolant
    unstable: np.ndarray    # per-point extrapolation-instability flags
    negativity: np.ndarray  # per-point pre-clamp negativity beyond tolerance

    @property
    def integral(self):
        return float(np.trapezoid(self.density, self.grid))


def neville_to_zero(nodes, values):
    """Polynomial extrapolation of (nodes, values) to 0.

    Returns (value, corrections) where corrections are the successive
    diagonal increments of the Neville table, used as a stability signal.
    """
    nodes = [float(y) for y in nodes]
    P = [complex(v) for v in values]
    n = len(P)
    diag = [P[0]]
    for k in range(1, n):
        for i in range(n - k):
            P[i] = ((0.0 - nodes[i + k]) * P[i] - (0.0 - nodes[i]) * P[i + 1]) / (
                nodes[i] - nodes[i + k])
        diag.append(P[0])
    corrections = [abs(diag[k] - diag[k - 1]) for k in range(1, n)]
    return P[0], corrections


def _lambda_builder(m, slot):
    eye = np.eye(m, dtype=complex)
    if slot is None:
        def build(x, y):
            return (x + 1j * y) * eye
        def extract(G):
            return complex(np.trace(G) / m)
    else:
        E = np.zeros((m, m), dtype=complex)
        E[slot] = 1.0
        def build(x, y):
            return x * E + 1j * y * eye
        def extract(G):
            return complex(G[slot])
    return build, extract


class _Sweeper:
    """Evaluates -Im g / pi along x at fixed y, warm-starting the solver."""

    def __init__(self, pencil, model, slot, tol):
        self.pencil, self.model, self.tol = pencil, model, tol
        self.build, self.extract = _lambda_builder(pencil.m, slot)
        self._warm = {}

    def phi(self, x, y):
        sol = solve_G(self.pencil, self.model, self.build(x, y),
                      tol=self.tol, G0=self._warm.get(y))
        self._warm[y] = sol.G
        return -self.extract(sol.G).imag / np.pi

    def extrapolated(self, x, levels):
        vals = [self.phi(x, y) for y in levels]
        value, corrections = neville_to_zero(levels, vals)
        return value.real if isinstance(value, complex) else float(value), corrections


def density(pencil, model, grid, y_levels=(0.05, 0.025, 0.0125), tol=1e-10,
            threshold=1e-3, slot=None, refine=True, edge_floor=2e-3):
    """Density of the spectral measure on a sorted grid, plus its support.

    ``slot=None`` uses tr_m(G(z 1_m)); ``slot=(i, i)`` uses the corner entry
    of G at x E_ss + i y 1_m.  Edge refinement bisects against a ladder
    (4f, 2f, f) with f = edge_floor.
    """
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or len(grid) < 2 or np.any(np.diff(grid) <= 0):
        raise ValueError("grid must be a sorted 1-d array of at least 2 points")
    y_levels = tuple(float(y) for y in y_levels)
    if len(y_levels) < 2 or any(y <= 0 for y in y_levels) or any(np.diff(y_levels) >= 0):
        raise ValueError("y_levels must be >= 2 decreasing positive values")

    sweeper = _Sweeper(pencil, model, slot, tol)
    phi = np.empty((len(y_levels), len(grid)))
    for j, y in enumerate(y_levels):
        for i, x in enumerate(grid):
            phi[j, i] = sweeper.phi(x, y)

    raw = np.empty(len(grid))
    unstable = np.zeros(len(grid), dtype=bool)
    for i in range(len(grid)):
        value, corrections = neville_to_zero(y_levels, phi[:, i])
        raw[i] = value.real
        if len(corrections) >= 2 and corrections[-1] > corrections[-2] and corrections[-1] > 1e-8:
            unstable[i] = True
    negativity = raw < NEGATIVITY_TOL
    dens = np.clip(raw, 0.0, None)

    support = _detect_support(grid, dens, threshold)
    if refine and support:
        ladder = (4 * edge_floor, 2 * edge_floor, edge_floor)
        predicate = lambda x: sweeper.extrapolated(x, ladder)[0] > threshold
        support = [_refine_interval(grid, lo, hi, predicate) for (lo, hi) in support]

    return SpectralDensityEstimate(
        grid=grid, density=dens, y_levels=y_levels, support=tuple(support),
        threshold=threshold, preclamp_min=float(raw.min()),
        unstable=unstable, negativity=negativity)


def _detect_support(grid, dens, threshold):
    above = dens > threshold
    intervals = []
    i = 0
    while i < len(grid):
        if above[i]:
            j = i
            while j + 1 < len(grid) and above[j + 1]:
                j += 1
            intervals.append((float(grid[i]), float(grid[j])))
            i = j + 1
        else:
            i += 1
    return intervals


def _bisect(x_false, x_true, predicate, xtol):
    while abs(x_true - x_false) > xtol:
        mid = 0.5 * (x_true + x_false)
        if predicate(mid):
            x_true = mid
        else:
            x_false = mid
    return x_true


def _refine_edge(x_edge, inward, outward, predicate, step, xtol):
    """Refine one endpoint against the fine-ladder predicate.

    The coarse detection may overshoot (its smoothing bias is larger), so
    first walk inward to a predicate-true bracket point, then bisect against
    the first false point on the outward side.
    """
    x_true = None
    x = x_edge
    for _ in range(64):
        if predicate(x):
            x_true = x
            break
        nxt = inward(x, step)
        if nxt is None:
            return x_edge
        x = nxt
    if x_true is None:
        return x_edge
    x_false = outward(x_true, step)
    while x_false is not None and predicate(x_false):
        x_true = x_false
        x_false = outward(x_true, step)
    if x_false is None:
        return x_true
    return _bisect(x_false, x_true, predicate, xtol)


def _refine_interval(grid, lo, hi, predicate, xtol=1e-4):
    step = float(grid[1] - grid[0])
    mid = 0.5 * (lo + hi)

    def in_right(x, s):
        nxt = x - s
        return nxt if nxt > mid else None

    def out_right(x, s):
        nxt = x + s
        return nxt if nxt <= grid[-1] + 1e-12 else None

    def in_left(x, s):
        nxt = x + s
        return nxt if nxt < mid else None

    def out_left(x, s):
        nxt = x - s
        return nxt if nxt >= grid[0] - 1e-12 else None

    hi = _refine_edge(hi, in_right, out_right, predicate, step, xtol)
    lo = _refine_edge(lo, in_left, out_left, predicate, step, xtol)
    return (float(lo), float(hi))


def support_of(pencil, model, tol=1e-10, threshold=1e-3, points=481, margin=1.0,
               edge_floor=2e-3):
    """Detected support intervals over an automatic grid sized from the pencil."""
    from .solver import s_norm_bound

    bound = s_norm_bound(pencil, model) + margin
    grid = np.linspace(-bound, bound, points)
    est = density(pencil, model, grid, tol=tol, threshold=threshold,
                  edge_floor=edge_floor)
    return est.support
