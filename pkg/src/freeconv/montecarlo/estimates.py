"""Estimate containers and log-log slope fitting."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class MonteCarloEstimate:
    """Replica mean of an m x m statistic with entrywise standard errors."""

    mean: np.ndarray
    stderr: np.ndarray
    replicas: int
    seed: int
    n: int

    @property
    def stderr_norm(self):
        """Scalar summary: Frobenius norm of the entrywise standard errors."""
        return float(np.linalg.norm(self.stderr))


@dataclass(frozen=True)
class ScalingPoint:
    n: int
    value: float
    stderr: float

    @property
    def stderr_ok(self):
        """The reporting gate: stderr below a third of the value."""
        return bool(self.stderr < self.value / 3.0)


@dataclass(frozen=True)
class ScalingReport:
    """A quantity measured across n with a fitted log-log slope.

    ``slope`` is always fitted for diagnostics; ``gated_slope`` is None
    unless every point passes the stderr gate, which is what keeps Monte
    Carlo noise from masquerading as scaling.
    """

    points: tuple  # of ScalingPoint
    slope: float
    slope_stderr: float

    def __post_init__(self):
        if len(self.points) < 3:
            raise ValueError("a slope needs at least 3 points")
        ns = [p.n for p in self.points]
        if any(b <= a for a, b in zip(ns, ns[1:])):
            raise ValueError("n values must be strictly increasing")

    @property
    def n_values(self):
        return [p.n for p in self.points]

    @property
    def values(self):
        return [p.value for p in self.points]

    @property
    def all_gated(self):
        return all(p.stderr_ok for p in self.points)

    @property
    def gated_slope(self):
        return self.slope if self.all_gated else None


def fit_loglog(ns, values, stderrs):
    """Weighted least squares of log(value) on log(n).

    Points are weighted by their relative standard errors (floored at 1e-6
    so exact values do not degenerate the fit).  Returns (slope,
    slope_stderr).
    """
    ns = np.asarray(ns, dtype=float)
    values = np.asarray(values, dtype=float)
    stderrs = np.asarray(stderrs, dtype=float)
    if np.any(values <= 0):
        raise ValueError("log-log fit needs positive values")
    x = np.log(ns)
    y = np.log(values)
    sigma = np.maximum(stderrs / values, 1e-6)
    w = 1.0 / sigma ** 2
    W = w.sum()
    xbar = (w * x).sum() / W
    ybar = (w * y).sum() / W
    sxx = (w * (x - xbar) ** 2).sum()
    slope = (w * (x - xbar) * (y - ybar)).sum() / sxx
    return float(slope), float(np.sqrt(1.0 / sxx))


def scaling_report(ns, values, stderrs):
    slope, slope_se = fit_loglog(ns, values, stderrs)
    points = tuple(ScalingPoint(int(n), float(v), float(s))
                   for n, v, s in zip(ns, values, stderrs))
    return ScalingReport(points=points, slope=slope, slope_stderr=slope_se)
