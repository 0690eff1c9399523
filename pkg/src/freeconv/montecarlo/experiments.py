"""Finite-n verification experiments.

Each experiment draws independent replicas keyed by (seed, replica index),
reduces them through the deterministic chunk machinery, and reports values
with standard errors.  Error bars for nonlinear functions of replica means
come from a leave-one-chunk-out jackknife; variances are estimated as the
mean of per-chunk sample variances with their spread as the error bar.

The master-equation residual is reported in two forms.  The direct form
plugs the (control-variate corrected) replica mean into the defining
quadratic; its error bar is limited by how well the mean itself is known.
The covariance form uses the exact algebraic identity

    sum_p a_p G_n a_p G_n + (a0 - lambda) G_n + 1 + R_n / n
        = - sum_p a_p E[(H - G_n) a_p (H - G_n)] - eps_n

whose right-hand covariance is measurable at relative precision; for
Gaussian entries eps_n vanishes identically, so the covariance form is an
unbiased estimator of the residual there.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..ensembles import RngStream, WishartSpec, kappa4
from ..freeprob.corrections import corrections
from ..freeprob.density import support_of
from ..freeprob.norms import norm_prediction
from ..freeprob.solver import SpectralParameter, solve_G
from ..linearize import assemble
from ..ncpoly import NCPolynomial, adjoint, evaluate
from .estimates import MonteCarloEstimate, ScalingReport, scaling_report
from .parallel import combine_sums, jackknife_chunks, map_chunks
from .resolvent import (ScalarPencilView, WignerEnsemble, WishartEnsemble,
                        control_correction, normalized_sum_eigs, resolvent_stats,
                        rn_quadruple, scalar_resolvent_diag, scalar_resolvent_trace)

DEFAULT_CONTROL_MOMENTS = 7


def _seed_for(seed, n):
    """Stable per-n master seed derived from the experiment seed."""
    return int(np.random.SeedSequence(seed, spawn_key=(int(n),)).generate_state(1)[0])


def _rng(seed, j):
    return RngStream(master_seed=seed, stream_id=j).generator()


def _mean_and_stderr(S1, A2, count):
    mean = S1 / count
    var = np.maximum(A2 / count - np.abs(mean) ** 2, 0.0)
    stderr = np.sqrt(var / max(count - 1, 1))
    return mean, stderr


def _opnorm(a):
    return float(np.linalg.norm(a, 2))


# -- replica kernel for Wigner/Wishart resolvent statistics -------------------

@dataclass(frozen=True)
class _StatsTask:
    pencil: object
    ensemble: object
    lam: object            # m x m complex array
    n: int
    seed: int
    controls: int          # Chebyshev control moments (0 = off; m = 1 Wigner only)
    rn_limit: int          # replicas below this index also estimate the R_n quadruple
    block_avg: object      # None or m x m matrix 'a' for the diagonal-block average


def _needs_diag(task, j):
    return task.block_avg is not None or j < task.rn_limit


def _stats_chunk(task, start, stop):
    pencil, n, m = task.pencil, task.n, task.pencil.m
    lam = np.asarray(task.lam)
    scalar = m == 1
    view = ScalarPencilView.of(pencil) if scalar and pencil.r > 0 else None
    is_wigner = isinstance(task.ensemble, WignerEnsemble)
    zeros = np.zeros((m, m), dtype=complex)
    rzeros = np.zeros((m, m))
    part = {
        "count": 0, "S1": zeros.copy(), "A2": rzeros.copy(),
        "S1c": zeros.copy(), "A2c": rzeros.copy(), "Squad": zeros.copy(),
        "count_rn": 0, "Srn": zeros.copy(), "A2rn": rzeros.copy(),
        "count_blk": 0, "Sblk": zeros.copy(), "A2blk": rzeros.copy(),
    }
    lam_scalar = complex(lam[0, 0]) if scalar else None
    for j in range(start, stop):
        rng = _rng(task.seed, j)
        mats = task.ensemble.sample_tuple(pencil.r, n, rng)
        diag = None
        if scalar and view is not None:
            eigs, vecs = normalized_sum_eigs(view, mats, vectors=_needs_diag(task, j))
            H = np.array([[scalar_resolvent_trace(view, eigs, lam_scalar)]])
            if vecs is not None:
                d = scalar_resolvent_diag(view, eigs, vecs, lam_scalar)
                diag = d.reshape(n, 1, 1)
            ctrl = zeros
            if task.controls > 0 and is_wigner:
                c = control_correction(view, eigs, lam_scalar, task.controls, n,
                                       task.ensemble.dist)
                ctrl = np.array([[c]])
        else:
            H, diag = resolvent_stats(pencil, mats, lam,
                                      blocks="diag" if _needs_diag(task, j) else None)
            ctrl = zeros
        Z = H - ctrl
        part["count"] += 1
        part["S1"] += H
        part["A2"] += np.abs(H) ** 2
        part["S1c"] += Z
        part["A2c"] += np.abs(Z) ** 2
        quad = zeros.copy()
        for a in pencil.a:
            quad = quad + a @ H @ a @ H
        part["Squad"] += quad
        if j < task.rn_limit:
            q = rn_quadruple(diag, pencil.a)
            part["count_rn"] += 1
            part["Srn"] += q
            part["A2rn"] += np.abs(q) ** 2
        if task.block_avg is not None:
            a = np.asarray(task.block_avg)
            D = np.einsum("kab,bc,kcd->ad", diag, a, diag) / n
            part["count_blk"] += 1
            part["Sblk"] += D
            part["A2blk"] += np.abs(D) ** 2
    return part


_STATS_KEYS = ("count", "S1", "A2", "S1c", "A2c", "Squad",
               "count_rn", "Srn", "A2rn", "count_blk", "Sblk", "A2blk")


def _run_stats(pencil, ensemble, lam, n, replicas, seed, workers,
               controls=0, rn_limit=0, block_avg=None):
    lam = SpectralParameter.wrap(lam, m=pencil.m)
    if lam.half_plane != "upper":
        raise ValueError("experiments require Im(lambda) positive definite")
    task = _StatsTask(pencil=pencil, ensemble=ensemble, lam=np.asarray(lam.matrix),
                      n=n, seed=seed, controls=controls, rn_limit=rn_limit,
                      block_avg=block_avg)
    return map_chunks(_stats_chunk, task, replicas, workers=workers)


def _default_controls(pencil, ensemble, controls):
    if controls is not None:
        return controls
    if pencil.m == 1 and pencil.r > 0 and isinstance(ensemble, WignerEnsemble):
        return DEFAULT_CONTROL_MOMENTS
    return 0


# -- G_n estimation ------------------------------------------------------------

def estimate_Gn(pencil, ensemble, lam, n, replicas, seed, workers=1, controls=None):
    """Replica mean of H_n(lambda) with entrywise standard errors.

    Moment control variates (exact-mean Chebyshev traces) are applied on the
    m = 1 Wigner path unless ``controls=0``.
    """
    if replicas < 2:
        raise ValueError("replicas must be >= 2 so a standard error exists")
    controls = _default_controls(pencil, ensemble, controls)
    partials = _run_stats(pencil, ensemble, lam, n, replicas, seed, workers,
                          controls=controls)
    total = combine_sums(partials, _STATS_KEYS)
    mean, stderr = _mean_and_stderr(total["S1c"], total["A2c"], total["count"])
    return MonteCarloEstimate(mean=mean, stderr=stderr, replicas=replicas,
                              seed=seed, n=n)


# -- iid master-equation residual ----------------------------------------------

@dataclass(frozen=True)
class MasterIidPoint:
    n: int
    replicas: int
    rn_replicas: int
    kappa4: float
    G_hat: MonteCarloEstimate
    rn_hat: np.ndarray
    rn_stderr: np.ndarray
    residual_with: float
    residual_with_stderr: float
    residual_without: float
    residual_without_stderr: float
    residual_cov: float
    residual_cov_stderr: float
    cov_form_exact: bool   # True when the entry law is Gaussian (eps_n = 0)

    def gate(self, which="cov"):
        value, stderr = {
            "cov": (self.residual_cov, self.residual_cov_stderr),
            "with": (self.residual_with, self.residual_with_stderr),
            "without": (self.residual_without, self.residual_without_stderr),
        }[which]
        return stderr < value / 3.0


def _quadratic_residual(pencil, lam, G, rn_over_n=None):
    out = (pencil.a0 - lam) @ G + np.eye(pencil.m)
    for a in pencil.a:
        out = out + a @ G @ a @ G
    if rn_over_n is not None:
        out = out + rn_over_n
    return out


def master_residual_iid(pencil, dist, lam, n, replicas, seed, workers=1,
                        rn_replicas=None, controls=None):
    """Monte Carlo residual of the finite-n master equation at one n.

    Returns direct residuals with and without the R_n/n term, the empirical
    R_n, and the covariance-form residual (exact for Gaussian entries).
    """
    ensemble = WignerEnsemble(dist)
    k4 = kappa4(dist)
    if rn_replicas is None:
        rn_replicas = min(replicas, 4000) if k4 != 0.0 else 0
    controls = _default_controls(pencil, ensemble, controls)
    lam = SpectralParameter.wrap(lam, m=pencil.m)
    lam_m = np.asarray(lam.matrix)
    partials = _run_stats(pencil, ensemble, lam, n, replicas, seed, workers,
                          controls=controls, rn_limit=rn_replicas)
    total = combine_sums(partials, _STATS_KEYS)
    G_hat = MonteCarloEstimate(*_mean_and_stderr(total["S1c"], total["A2c"],
                                                 total["count"]),
                               replicas=replicas, seed=seed, n=n)

    if rn_replicas > 0:
        rn_mean, rn_stderr = _mean_and_stderr(total["Srn"], total["A2rn"],
                                              total["count_rn"])
        rn_mean, rn_stderr = 0.5 * k4 * rn_mean, 0.5 * abs(k4) * rn_stderr
    else:
        rn_mean = np.zeros((pencil.m, pencil.m), dtype=complex)
        rn_stderr = np.zeros((pencil.m, pencil.m))

    def stat_with(tot):
        G = tot["S1c"] / tot["count"]
        rn = 0.5 * k4 * tot["Srn"] / tot["count_rn"] if tot["count_rn"] > 0 else None
        return _opnorm(_quadratic_residual(pencil, lam_m, G,
                                           None if rn is None else rn / n))

    def stat_without(tot):
        G = tot["S1c"] / tot["count"]
        return _opnorm(_quadratic_residual(pencil, lam_m, G))

    res_with, se_with = jackknife_chunks(partials, _STATS_KEYS, stat_with)
    res_without, se_without = jackknife_chunks(partials, _STATS_KEYS, stat_without)

    # Covariance form: -sum_p a_p Cov a_p from the exact Bessel identity
    # sum_j sum_p a_p (H_j - Gbar) a_p (H_j - Gbar) = Squad - R * quad(Gbar).
    def cov_matrix(tot):
        R = tot["count"]
        Gbar = tot["S1"] / R
        quad_bar = np.zeros_like(Gbar)
        for a in pencil.a:
            quad_bar = quad_bar + a @ Gbar @ a @ Gbar
        return -(tot["Squad"] - R * quad_bar) / (R - 1)

    res_cov = _opnorm(cov_matrix(total))
    chunk_vals = np.array([cov_matrix(p) for p in partials if p["count"] >= 2])
    B = len(chunk_vals)
    se_entry = chunk_vals.std(axis=0, ddof=1) / math.sqrt(B) if B >= 2 else \
        np.full((pencil.m, pencil.m), np.nan)
    res_cov_se = float(np.linalg.norm(se_entry))

    return MasterIidPoint(
        n=n, replicas=replicas, rn_replicas=rn_replicas, kappa4=k4,
        G_hat=G_hat, rn_hat=rn_mean, rn_stderr=rn_stderr,
        residual_with=res_with, residual_with_stderr=se_with,
        residual_without=res_without, residual_without_stderr=se_without,
        residual_cov=res_cov, residual_cov_stderr=res_cov_se,
        cov_form_exact=(dist.kind == "gaussian"))


def master_scaling_iid(pencil, dist, lam, n_values, replicas, seed, workers=1,
                       which="cov", rn_replicas=None, controls=None):
    """Residual-vs-n sweep; ``replicas`` may be one int or a per-n list."""
    if isinstance(replicas, int):
        replicas = [replicas] * len(n_values)
    points = [master_residual_iid(pencil, dist, lam, n, r, _seed_for(seed, n),
                                  workers=workers, rn_replicas=rn_replicas,
                                  controls=controls)
              for n, r in zip(n_values, replicas)]
    field = {"cov": ("residual_cov", "residual_cov_stderr"),
             "with": ("residual_with", "residual_with_stderr"),
             "without": ("residual_without", "residual_without_stderr")}[which]
    report = scaling_report(n_values,
                            [getattr(p, field[0]) for p in points],
                            [getattr(p, field[1]) for p in points])
    return report, points


# -- Wishart master-equation residual -------------------------------------------

@dataclass(frozen=True)
class MasterWishartPoint:
    n: int
    p: int
    replicas: int
    G_hat: MonteCarloEstimate
    residual: float
    residual_stderr: float
    branch: str            # which invertibility branch justified the run


def _wishart_branch(pencil, lam):
    """Check the preconditions for inverting (1 - a_l G_n)."""
    norms = pencil.coefficient_norms()[1:]
    if norms and lam.im_inv_norm < 1.0 / (2.0 * max(norms)):
        return "imaginary-part bound"
    invertible = True
    for a in pencil.a:
        if a.shape[0] and np.linalg.matrix_rank(a) < a.shape[0]:
            invertible = False
    if invertible and pencil.r > 0:
        return "invertible coefficients"
    if pencil.r == 0:
        return "no random part"
    raise ValueError(
        "wishart master residual needs ||Im(lambda)^-1|| < 1/(2 max ||a_l||) "
        f"(have {lam.im_inv_norm:.3g}) or all a_l invertible")


def master_residual_wishart(pencil, alpha, lam, n, replicas, seed, workers=1):
    """Residual of the Wishart master equation, using the replica mean G_n."""
    ensemble = WishartEnsemble(alpha)
    lam = SpectralParameter.wrap(lam, m=pencil.m)
    branch = _wishart_branch(pencil, lam)
    spec = WishartSpec(n=n, alpha=alpha)
    lam_m = np.asarray(lam.matrix)
    partials = _run_stats(pencil, ensemble, lam, n, replicas, seed, workers)
    total = combine_sums(partials, _STATS_KEYS)
    G_hat = MonteCarloEstimate(*_mean_and_stderr(total["S1c"], total["A2c"],
                                                 total["count"]),
                               replicas=replicas, seed=seed, n=n)
    eye = np.eye(pencil.m)
    ratio = spec.p / spec.n

    def stat(tot):
        G = tot["S1c"] / tot["count"]
        acc = -pencil.a0 @ G + lam_m @ G - eye
        for a in pencil.a:
            acc = acc - ratio * np.linalg.solve(eye - a @ G, a @ G)
        return _opnorm(acc)

    residual, se = jackknife_chunks(partials, _STATS_KEYS, stat)
    return MasterWishartPoint(n=n, p=spec.p, replicas=replicas, G_hat=G_hat,
                              residual=residual, residual_stderr=se, branch=branch)


def master_scaling_wishart(pencil, alpha, lam, n_values, replicas, seed, workers=1):
    if isinstance(replicas, int):
        replicas = [replicas] * len(n_values)
    points = [master_residual_wishart(pencil, alpha, lam, n, r,
                                      _seed_for(seed, n), workers=workers)
              for n, r in zip(n_values, replicas)]
    report = scaling_report(n_values, [p.residual for p in points],
                            [p.residual_stderr for p in points])
    return report, points


# -- kappa4 correction check -----------------------------------------------------

@dataclass(frozen=True)
class CorrectionPoint:
    n: int
    replicas: int
    deviation: float        # || n (G_n - G) - L ||
    stderr: float
    n_times_diff: np.ndarray


@dataclass(frozen=True)
class CorrectionCheckReport:
    points: tuple
    L: np.ndarray
    kappa4: float

    @property
    def decreasing(self):
        """Whether the deviation decreases from the first to the last n."""
        return self.points[-1].deviation < self.points[0].deviation

    @property
    def monotone_within_stderr(self):
        ok = True
        for a, b in zip(self.points, self.points[1:]):
            ok = ok and (b.deviation <= a.deviation + a.stderr + b.stderr)
        return ok


def correction_check(pencil, dist, lam, n_values, replicas, seed, workers=1,
                     controls=None, solver_tol=1e-12):
    """Compare n (G_n - G) against the first-order correction L(lambda)."""
    lam = SpectralParameter.wrap(lam, m=pencil.m)
    k4 = kappa4(dist)
    sol = solve_G(pencil, WignerEnsemble(dist).limit_model, lam, tol=solver_tol)
    G = sol.G
    L = corrections(pencil, lam, k4, tol=solver_tol).L
    if isinstance(replicas, int):
        replicas = [replicas] * len(n_values)
    points = []
    for n, r in zip(n_values, replicas):
        est = estimate_Gn(pencil, WignerEnsemble(dist), lam, n, r,
                          _seed_for(seed, n), workers=workers, controls=controls)
        diff = n * (est.mean - G) - L
        points.append(CorrectionPoint(
            n=n, replicas=r, deviation=_opnorm(diff),
            stderr=float(n * np.linalg.norm(est.stderr)),
            n_times_diff=n * (est.mean - G)))
    return CorrectionCheckReport(points=tuple(points), L=L, kappa4=k4)


# -- diagonal-block average -------------------------------------------------------

@dataclass(frozen=True)
class BlockAverageReport:
    n: int
    replicas: int
    mean: np.ndarray
    stderr: np.ndarray
    target: np.ndarray      # G a G from the limiting transform
    deviation: float


def block_average_check(pencil, dist, a, lam, n, replicas, seed, workers=1,
                        solver_tol=1e-12):
    """E[(1/n) sum_k R_kk a R_kk] against G a G."""
    a = np.asarray(a, dtype=complex)
    lam = SpectralParameter.wrap(lam, m=pencil.m)
    partials = _run_stats(pencil, WignerEnsemble(dist), lam, n, replicas, seed,
                          workers, block_avg=a)
    total = combine_sums(partials, _STATS_KEYS)
    mean, stderr = _mean_and_stderr(total["Sblk"], total["A2blk"],
                                    total["count_blk"])
    G = solve_G(pencil, WignerEnsemble(dist).limit_model, lam, tol=solver_tol).G
    target = G @ a @ G
    return BlockAverageReport(n=n, replicas=replicas, mean=mean, stderr=stderr,
                              target=target, deviation=_opnorm(mean - target))


# -- variance scaling --------------------------------------------------------------

@dataclass(frozen=True)
class TraceWordTarget:
    """Variance of tr_n(X_{i1} ... X_{id})."""
    word: tuple

    def __post_init__(self):
        if len(self.word) > 6:
            raise ValueError("word length must be <= 6")


@dataclass(frozen=True)
class ResolventEntryTarget:
    """Variance of one entry of H_n(lambda)."""
    pencil: object
    lam: object
    slot: tuple = (0, 0)


@dataclass(frozen=True)
class _VarianceTask:
    target: object
    ensemble: object
    n: int
    seed: int


def _variance_chunk(task, start, stop):
    n = task.n
    vals = []
    if isinstance(task.target, TraceWordTarget):
        word = task.target.word
        r = max(word, default=0)
        for j in range(start, stop):
            rng = _rng(task.seed, j)
            mats = task.ensemble.sample_tuple(r, n, rng)
            if not word:
                vals.append(1.0 + 0.0j)
                continue
            acc = mats[word[0] - 1]
            for g in word[1:]:
                acc = acc @ mats[g - 1]
            vals.append(np.trace(acc) / n)
    else:
        pencil, slot = task.target.pencil, task.target.slot
        lam = np.asarray(task.target.lam)
        scalar = pencil.m == 1
        view = ScalarPencilView.of(pencil) if scalar and pencil.r > 0 else None
        for j in range(start, stop):
            rng = _rng(task.seed, j)
            mats = task.ensemble.sample_tuple(pencil.r, n, rng)
            if view is not None:
                eigs, _ = normalized_sum_eigs(view, mats)
                vals.append(scalar_resolvent_trace(view, eigs, complex(lam[0, 0])))
            else:
                H, _ = resolvent_stats(pencil, mats, lam)
                vals.append(complex(H[slot]))
    v = np.asarray(vals)
    count = len(v)
    if count >= 2:
        mu = v.mean()
        var = float(np.abs(v - mu).__pow__(2).sum() / (count - 1))
    else:
        var = np.nan
    return {"count": count, "var": var}


def variance_point(target, ensemble, n, replicas, seed, workers=1):
    """Variance of the target statistic with a batch-spread error bar."""
    task = _VarianceTask(target=target, ensemble=ensemble, n=n, seed=seed)
    partials = map_chunks(_variance_chunk, task, replicas, workers=workers)
    vs = np.array([p["var"] for p in partials if p["count"] >= 2])
    value = float(vs.mean())
    stderr = float(vs.std(ddof=1) / math.sqrt(len(vs))) if len(vs) >= 2 else np.nan
    return value, stderr


def variance_checks(target, ensemble, n_values, replicas, seed, workers=1):
    """Variance-vs-n sweep with the fitted log-log slope."""
    if isinstance(replicas, int):
        replicas = [replicas] * len(n_values)
    if min(replicas) < 50:
        raise ValueError("variance scaling needs replicas >= 50")
    values, stderrs = [], []
    for n, r in zip(n_values, replicas):
        v, s = variance_point(target, ensemble, n, r, _seed_for(seed, n), workers)
        values.append(v)
        stderrs.append(s)
    return scaling_report(n_values, values, stderrs)


# -- Wishart differentiation-formula check -----------------------------------------

@dataclass(frozen=True)
class IbpPhi:
    """Test function: Tr(Y A) or one resolvent entry (z - Y)^{-1}_{jk}."""
    kind: str                   # "trace_linear" | "resolvent_entry"
    entry: tuple = (0, 0)
    z: complex = 3j

    def __post_init__(self):
        if self.kind not in ("trace_linear", "resolvent_entry"):
            raise ValueError(f"unknown phi kind {self.kind!r}")
        if self.kind == "resolvent_entry" and abs(self.z.imag) < 1.0:
            raise ValueError("resolvent phi requires |Im z| >= 1")


def basis_hermitian(n, j, k):
    """E_jj, or E_jk + E_kj for j != k."""
    H = np.zeros((n, n), dtype=complex)
    H[j, k] = 1.0
    H[k, j] = 1.0
    return H


@dataclass(frozen=True)
class _IbpTask:
    spec: WishartSpec
    phi: IbpPhi
    h_entry: tuple
    seed: int


def _ibp_chunk(task, start, stop):
    from ..ensembles import sample_wishart

    n, p = task.spec.n, task.spec.p
    H = basis_hermitian(n, *task.h_entry)
    trH = complex(np.trace(H))
    phi = task.phi
    S1 = 0.0 + 0.0j
    A2 = 0.0
    count = 0
    for j in range(start, stop):
        rng = _rng(task.seed, j)
        Y = sample_wishart(task.spec, rng)
        Yinv = np.linalg.inv(Y)
        tr_YinvH = complex(np.trace(Yinv @ H))
        if phi.kind == "trace_linear":
            A = basis_hermitian(n, *phi.entry)
            val = complex(np.trace(Y @ A))          # Phi(0) = 0 already
            deriv = complex(np.trace(H @ A))
        else:
            a, b = phi.entry
            R = np.linalg.inv(phi.z * np.eye(n) - Y)
            val = complex(R[a, b]) - (1.0 / phi.z if a == b else 0.0)
            deriv = complex((R @ H @ R)[a, b])
        t = deriv - n * val * trH + (p - n) * val * tr_YinvH
        S1 += t
        A2 += abs(t) ** 2
        count += 1
    return {"count": count, "S1": S1, "A2": A2}


@dataclass(frozen=True)
class IbpReport:
    value: complex
    stderr: float
    replicas: int
    n: int
    p: int
    validated: bool

    @property
    def within_four_stderr(self):
        return abs(self.value) <= 4.0 * self.stderr


def wishart_ibp_check(spec, phi, h_entry, replicas, seed, workers=1,
                      validated_only=True):
    """Monte Carlo check of the Wishart differentiation identity.

    Requires p >= n + 2 so the inverse-moment terms are integrable; runs
    with p in {n, n+1} are refused unless ``validated_only=False``, in which
    case the report is flagged unvalidated.
    """
    validated = spec.p >= spec.n + 2
    if not validated and validated_only:
        raise ValueError(f"p = {spec.p} < n + 2 = {spec.n + 2}: inverse moments "
                         "are not integrable; pass validated_only=False to force")
    task = _IbpTask(spec=spec, phi=phi, h_entry=tuple(h_entry), seed=seed)
    partials = map_chunks(_ibp_chunk, task, replicas, workers=workers)
    total = combine_sums(partials, ("count", "S1", "A2"))
    count = total["count"]
    mean = total["S1"] / count
    var = max(total["A2"] / count - abs(mean) ** 2, 0.0)
    stderr = math.sqrt(var / max(count - 1, 1))
    return IbpReport(value=complex(mean), stderr=float(stderr), replicas=count,
                     n=spec.n, p=spec.p, validated=validated)


# -- spectrum containment -------------------------------------------------------------

@dataclass(frozen=True)
class ContainmentReport:
    n: int
    epsilon: float
    support: tuple
    per_seed: tuple          # bools
    extremes: tuple          # (min eig, max eig) per seed

    @property
    def pass_rate(self):
        return sum(self.per_seed) / len(self.per_seed)


@dataclass(frozen=True)
class _ContainTask:
    pencil: object
    ensemble: object
    n: int
    seed: int
    support: tuple
    epsilon: float


def _within_support(eigs, support, epsilon):
    ok = np.zeros(len(eigs), dtype=bool)
    for lo, hi in support:
        ok |= (eigs >= lo - epsilon) & (eigs <= hi + epsilon)
    return bool(ok.all())


def _contain_chunk(task, start, stop):
    out = []
    for j in range(start, stop):
        rng = _rng(task.seed, j)
        mats = task.ensemble.sample_tuple(task.pencil.r, task.n, rng)
        S = assemble(task.pencil, mats)
        eigs = np.linalg.eigvalsh(S)
        out.append((j, _within_support(eigs, task.support, task.epsilon),
                    float(eigs[0]), float(eigs[-1])))
    return {"rows": out}


def spectrum_containment(pencil, ensemble, n, epsilon, seeds, seed, workers=1,
                         support=None):
    """Per-seed check that sp(S_n) lies in the epsilon-thickened support."""
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    if support is None:
        if pencil.r == 0:
            eigs = np.linalg.eigvalsh(pencil.a0)
            support = tuple((float(e), float(e)) for e in eigs)
        else:
            support = tuple(support_of(pencil, ensemble.limit_model))
    task = _ContainTask(pencil=pencil, ensemble=ensemble, n=n, seed=seed,
                        support=tuple(support), epsilon=float(epsilon))
    partials = map_chunks(_contain_chunk, task, seeds, workers=workers)
    rows = [r for p in partials for r in p["rows"]]
    rows.sort(key=lambda r: r[0])
    return ContainmentReport(n=n, epsilon=epsilon, support=tuple(support),
                             per_seed=tuple(r[1] for r in rows),
                             extremes=tuple((r[2], r[3]) for r in rows))


# -- polynomial norm convergence ---------------------------------------------------------

@dataclass(frozen=True)
class NormConvergencePoint:
    n: int
    seeds: int
    norms: tuple
    median_abs_dev: float
    median_stderr: float


@dataclass(frozen=True)
class NormConvergenceReport:
    prediction: float
    points: tuple

    @property
    def medians_non_increasing(self):
        """Medians may tie within their combined standard errors."""
        ok = True
        for a, b in zip(self.points, self.points[1:]):
            ok = ok and (b.median_abs_dev
                         <= a.median_abs_dev + a.median_stderr + b.median_stderr)
        return ok


@dataclass(frozen=True)
class _NormTask:
    poly: object
    self_adjoint: bool
    ensemble: object
    n: int
    seed: int


def _norm_chunk(task, start, stop):
    p = task.poly
    r = p.num_generators
    out = []
    for j in range(start, stop):
        rng = _rng(task.seed, j)
        mats = task.ensemble.sample_tuple(r, task.n, rng)
        if task.self_adjoint:
            eigs = np.linalg.eigvalsh(evaluate(p, mats))
            out.append((j, float(np.abs(eigs).max())))
        else:
            q = adjoint(p) * p
            eigs = np.linalg.eigvalsh(evaluate(q, mats))
            out.append((j, float(math.sqrt(max(eigs.max(), 0.0)))))
    return {"rows": out}


def norm_convergence(p, ensemble, n_values, seeds, seed, workers=1,
                     prediction=None, prediction_tol=1e-3):
    """Sampled operator norms of p(X) against the predicted limiting norm."""
    if prediction is None:
        prediction = norm_prediction(p, ensemble.limit_model, tol=prediction_tol)
    task_poly = p
    sa = p.is_self_adjoint()
    points = []
    for n in n_values:
        task = _NormTask(poly=task_poly, self_adjoint=sa, ensemble=ensemble,
                         n=n, seed=_seed_for(seed, n))
        partials = map_chunks(_norm_chunk, task, seeds, workers=workers)
        rows = [r for part in partials for r in part["rows"]]
        rows.sort(key=lambda r: r[0])
        norms = np.array([r[1] for r in rows])
        devs = np.abs(norms - prediction)
        med = float(np.median(devs))
        se = float(1.2533 * devs.std(ddof=1) / math.sqrt(len(devs)))
        points.append(NormConvergencePoint(n=n, seeds=seeds, norms=tuple(norms),
                                           median_abs_dev=med, median_stderr=se))
    return NormConvergenceReport(prediction=float(prediction), points=tuple(points))
