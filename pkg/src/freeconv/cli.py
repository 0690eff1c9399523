"""Batch experiment runner.

    freeconv <experiment> --config FILE [--seed S] [--workers W] [--out DIR]
    freeconv describe <experiment>

Exit status: 0 when the experiment's contract passed, 2 when it failed,
1 on configuration or runtime errors.  Each run writes
``<out>/<experiment>-<confighash>.json`` and ``.csv``; the CSV bytes are
identical for any worker count at a fixed seed.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time

import numpy as np

from . import config as cfgmod
from .config import ConfigError, config_hash, validate_config
from .ensembles import WishartSpec, kappa4
from .freeprob import density, norm_prediction, solve_G
from .montecarlo import (IbpPhi, ResolventEntryTarget, TraceWordTarget,
                         correction_check, master_residual_iid,
                         master_residual_wishart, norm_convergence,
                         scaling_report, spectrum_containment, variance_checks,
                         wishart_ibp_check)
from .results import ResultRecord, complex_pair, matrix_pairs

DEFAULT_Y_LEVELS = [0.05, 0.025, 0.0125]
DEFAULT_THRESHOLD = 1e-3
DEFAULT_EDGE_FLOOR = 2e-3
DEFAULT_SOLVE_TOL = 1e-10
DEFAULT_NORM_TOL = 1e-3
DEFAULT_WITH_RANGE = (-2.6, -1.4)
DEFAULT_WITHOUT_RANGE = (-1.6, -0.6)
DEFAULT_VARIANCE_RANGE = (-2.6, -1.4)
DEFAULT_PASS_RATE = 0.95
IBP_STDERR_FACTOR = 4.0


def _in_range(x, rng):
    return rng[0] <= x <= rng[1]


def _slope_range(cfg, key, default):
    rng = cfg.get(key, list(default))
    if (not isinstance(rng, list) or len(rng) != 2
            or not all(isinstance(x, (int, float)) for x in rng)):
        raise ConfigError(key, "expected [low, high]")
    return tuple(float(x) for x in rng)


# -- individual experiment runners --------------------------------------------

def run_solve(cfg, chash, workers):
    pencil = cfgmod.decode_pencil(cfgmod._require(cfg, "pencil"))
    model = cfgmod.decode_model(cfgmod._require(cfg, "model"))
    lam = cfgmod.decode_lambda(cfgmod._require(cfg, "lambda"), pencil.m)
    tol = float(cfg.get("tol", DEFAULT_SOLVE_TOL))
    sol = solve_G(pencil, model, lam, tol=tol)
    passed = bool(sol.converged and sol.residual_norm <= tol)
    rows = [[i, j, sol.G[i, j].real, sol.G[i, j].imag]
            for i in range(pencil.m) for j in range(pencil.m)]
    return ResultRecord(
        experiment="solve", config_hash=chash, seed=cfg["seed"], passed=passed,
        contract={"description": "converged with equation residual <= tol",
                  "tol": tol, "residual_norm": sol.residual_norm,
                  "converged": sol.converged},
        payload={"G": matrix_pairs(sol.G), "residual_norm": sol.residual_norm,
                 "iterations": sol.iterations},
        csv_header=["row", "col", "re", "im"],
        csv_rows=[[str(r[0]), str(r[1]), r[2], r[3]] for r in rows])


def run_density(cfg, chash, workers):
    pencil = cfgmod.decode_pencil(cfgmod._require(cfg, "pencil"))
    model = cfgmod.decode_model(cfgmod._require(cfg, "model"))
    gspec = cfgmod._require(cfg, "grid", dict)
    cfgmod._reject_unknown(gspec, {"min", "max", "step"}, "grid")
    lo = float(cfgmod._require(gspec, "min", (int, float)))
    hi = float(cfgmod._require(gspec, "max", (int, float)))
    step = float(cfgmod._require(gspec, "step", (int, float)))
    if step <= 0 or hi <= lo:
        raise ConfigError("grid", "need step > 0 and max > min")
    grid = np.arange(lo, hi + step / 2, step)
    y_levels = cfg.get("y_levels", DEFAULT_Y_LEVELS)
    threshold = float(cfg.get("threshold", DEFAULT_THRESHOLD))
    edge_floor = float(cfg.get("edge_floor", DEFAULT_EDGE_FLOOR))
    est = density(pencil, model, grid, y_levels=tuple(y_levels),
                  threshold=threshold, edge_floor=edge_floor)
    integral = est.integral
    passed = bool(0.98 <= integral <= 1.02)
    rows = [[x, d, str(int(u)), str(int(g))]
            for x, d, u, g in zip(est.grid, est.density, est.unstable, est.negativity)]
    return ResultRecord(
        experiment="density", config_hash=chash, seed=cfg["seed"], passed=passed,
        contract={"description": "density integrates to 1 within 0.02",
                  "integral": integral, "window": [0.98, 1.02]},
        payload={"support": [list(iv) for iv in est.support],
                 "threshold": est.threshold, "y_levels": list(est.y_levels),
                 "preclamp_min": est.preclamp_min, "integral": integral},
        csv_header=["x", "density", "unstable", "negative"], csv_rows=rows)


def run_norm_predict(cfg, chash, workers):
    poly = cfgmod.decode_polynomial(cfgmod._require(cfg, "polynomial"))
    model = cfgmod.decode_model(cfgmod._require(cfg, "model"))
    tol = float(cfg.get("tol", DEFAULT_NORM_TOL))
    value = norm_prediction(poly, model, tol=tol)
    contract = {"description": "norm prediction from the linearized pencil's "
                               "output-corner spectral density", "tol": tol}
    passed = True
    if "expected" in cfg:
        expected = float(cfg["expected"])
        etol = float(cfg.get("expected_tol", tol))
        passed = abs(value - expected) <= etol
        contract.update(expected=expected, expected_tol=etol,
                        abs_error=abs(value - expected))
    return ResultRecord(
        experiment="norm-predict", config_hash=chash, seed=cfg["seed"], passed=passed,
        contract=contract, payload={"prediction": value},
        csv_header=["prediction"], csv_rows=[[value]])


def run_converge(cfg, chash, workers):
    poly = cfgmod.decode_polynomial(cfgmod._require(cfg, "polynomial"))
    ensemble = cfgmod.decode_ensemble(cfgmod._require(cfg, "ensemble"))
    n_values = cfgmod.decode_int_list(cfgmod._require(cfg, "n_values"), "n_values")
    seeds = int(cfg.get("seeds", 20))
    prediction = cfg.get("prediction")
    rep = norm_convergence(poly, ensemble, n_values, seeds, cfg["seed"],
                           workers=workers,
                           prediction=None if prediction is None else float(prediction))
    passed = rep.medians_non_increasing
    contract = {"description": "median |norm - prediction| non-increasing in n "
                               "(ties within stderr)",
                "prediction": rep.prediction,
                "medians": [p.median_abs_dev for p in rep.points],
                "median_stderrs": [p.median_stderr for p in rep.points]}
    if "final_bound" in cfg:
        bound = float(cfg["final_bound"])
        contract["final_bound"] = bound
        passed = passed and rep.points[-1].median_abs_dev <= bound
    rows = []
    for pt in rep.points:
        for idx, v in enumerate(pt.norms):
            rows.append([str(pt.n), str(idx), v, abs(v - rep.prediction)])
    return ResultRecord(
        experiment="converge", config_hash=chash, seed=cfg["seed"], passed=bool(passed),
        contract=contract,
        payload={"prediction": rep.prediction,
                 "points": [{"n": p.n, "median_abs_dev": p.median_abs_dev,
                             "median_stderr": p.median_stderr} for p in rep.points]},
        csv_header=["n", "seed_index", "norm", "abs_dev"], csv_rows=rows)


def run_master_iid(cfg, chash, workers):
    pencil = cfgmod.decode_pencil(cfgmod._require(cfg, "pencil"))
    dist = cfgmod.decode_distribution(cfgmod._require(cfg, "distribution"))
    lam = cfgmod.decode_lambda(cfg.get("lambda", {"scalar": [0.0, 2.0]}), pencil.m)
    n_values = cfgmod.decode_int_list(cfgmod._require(cfg, "n_values"), "n_values")
    replicas = cfgmod.decode_replicas(cfgmod._require(cfg, "replicas"), n_values)
    if min(replicas) < 400:
        raise ConfigError("replicas", "master-check-iid needs replicas >= 400")
    rn_replicas = cfg.get("rn_replicas")
    controls = cfg.get("control_moments")
    with_range = _slope_range(cfg, "with_slope_range", DEFAULT_WITH_RANGE)
    without_range = _slope_range(cfg, "without_slope_range", DEFAULT_WITHOUT_RANGE)
    k4 = kappa4(dist)

    points = [master_residual_iid(pencil, dist, lam, n, r,
                                  _seed_for_point(cfg["seed"], n), workers=workers,
                                  rn_replicas=rn_replicas, controls=controls)
              for n, r in zip(n_values, replicas)]
    cov_rep = scaling_report(n_values, [p.residual_cov for p in points],
                             [p.residual_cov_stderr for p in points])
    without_rep = scaling_report(n_values, [p.residual_without for p in points],
                                 [p.residual_without_stderr for p in points])
    consistency = [p.residual_with <= p.residual_cov
                   + 4.0 * (p.residual_with_stderr + p.residual_cov_stderr)
                   for p in points]

    if k4 == 0.0:
        passed = (_in_range(cov_rep.slope, with_range) and cov_rep.all_gated)
        description = ("kappa4 = 0: covariance-form residual (exact identity for "
                       "Gaussian entries) decays like n^-2 with all stderr gates")
    else:
        passed = (_in_range(without_rep.slope, without_range)
                  and without_rep.all_gated
                  and _in_range(cov_rep.slope, with_range) and cov_rep.all_gated
                  and all(consistency))
        description = ("kappa4 != 0: residual without R_n/n decays like n^-1; "
                       "the covariance component of the corrected residual decays "
                       "like n^-2 and the direct corrected residual is consistent "
                       "with it within 4 stderr")
    contract = {
        "description": description, "kappa4": k4,
        "with_slope_range": list(with_range),
        "without_slope_range": list(without_range),
        "cov_slope": cov_rep.slope, "cov_gated": cov_rep.all_gated,
        "without_slope": without_rep.slope, "without_gated": without_rep.all_gated,
        "with_consistent": consistency,
    }
    rows = []
    for p in points:
        rows.append([str(p.n), str(p.replicas),
                     p.residual_with, p.residual_with_stderr,
                     p.residual_without, p.residual_without_stderr,
                     p.residual_cov, p.residual_cov_stderr,
                     p.rn_hat[0, 0].real, p.rn_hat[0, 0].imag,
                     str(int(p.gate("without"))), str(int(p.gate("cov")))])
    return ResultRecord(
        experiment="master-check-iid", config_hash=chash, seed=cfg["seed"],
        passed=bool(passed), contract=contract,
        payload={"points": [{
            "n": p.n, "replicas": p.replicas, "rn_replicas": p.rn_replicas,
            "residual_with": p.residual_with,
            "residual_with_stderr": p.residual_with_stderr,
            "residual_without": p.residual_without,
            "residual_without_stderr": p.residual_without_stderr,
            "residual_cov": p.residual_cov,
            "residual_cov_stderr": p.residual_cov_stderr,
            "rn_hat": matrix_pairs(p.rn_hat), "cov_form_exact": p.cov_form_exact,
        } for p in points]},
        csv_header=["n", "replicas", "res_with", "se_with", "res_without",
                    "se_without", "res_cov", "se_cov", "rn_re", "rn_im",
                    "gate_without", "gate_cov"],
        csv_rows=rows)


def run_master_wishart(cfg, chash, workers):
    pencil = cfgmod.decode_pencil(cfgmod._require(cfg, "pencil"))
    alpha = float(cfgmod._require(cfg, "alpha", (int, float)))
    lam = cfgmod.decode_lambda(cfg.get("lambda", {"scalar": [2.0, 4.0]}), pencil.m)
    n_values = cfgmod.decode_int_list(cfgmod._require(cfg, "n_values"), "n_values")
    replicas = cfgmod.decode_replicas(cfgmod._require(cfg, "replicas"), n_values)
    slope_range = _slope_range(cfg, "slope_range", DEFAULT_WITH_RANGE)
    factor = float(cfg.get("consistency_factor", 10.0))

    points = [master_residual_wishart(pencil, alpha, lam, n, r,
                                      _seed_for_point(cfg["seed"], n), workers=workers)
              for n, r in zip(n_values, replicas)]
    rep = scaling_report(n_values, [p.residual for p in points],
                         [p.residual_stderr for p in points])
    c_implied = points[0].residual * points[0].n ** 2
    consistency = [p.residual <= factor * (p.residual_stderr + c_implied / p.n ** 2)
                   for p in points[1:]]
    passed = all(consistency) and (not rep.all_gated
                                   or _in_range(rep.slope, slope_range))
    contract = {
        "description": "Wishart master-equation residual decays like n^-2; the "
                       "slope is asserted when every point passes the stderr gate, "
                       "and later points must stay within factor * (stderr + c/n^2) "
                       "of the constant c implied by the first point",
        "slope": rep.slope, "slope_range": list(slope_range),
        "gated": rep.all_gated, "consistency_factor": factor,
        "c_implied": c_implied, "consistency": consistency,
        "branch": points[0].branch,
    }
    rows = [[str(p.n), str(p.p), str(p.replicas), p.residual, p.residual_stderr]
            for p in points]
    return ResultRecord(
        experiment="master-check-wishart", config_hash=chash, seed=cfg["seed"],
        passed=bool(passed), contract=contract,
        payload={"points": [{"n": p.n, "p": p.p, "replicas": p.replicas,
                             "residual": p.residual,
                             "residual_stderr": p.residual_stderr}
                            for p in points]},
        csv_header=["n", "p", "replicas", "residual", "stderr"], csv_rows=rows)


def run_correction_check(cfg, chash, workers):
    pencil = cfgmod.decode_pencil(cfgmod._require(cfg, "pencil"))
    dist = cfgmod.decode_distribution(cfgmod._require(cfg, "distribution"))
    lam = cfgmod.decode_lambda(cfg.get("lambda", {"scalar": [0.0, 2.0]}), pencil.m)
    n_values = cfgmod.decode_int_list(cfgmod._require(cfg, "n_values"), "n_values")
    replicas = cfgmod.decode_replicas(cfgmod._require(cfg, "replicas"), n_values)
    controls = cfg.get("control_moments")
    rep = correction_check(pencil, dist, lam, n_values, replicas, cfg["seed"],
                           workers=workers, controls=controls)
    passed = rep.decreasing and rep.monotone_within_stderr
    contract = {
        "description": "|| n (G_n - G) - L || decreases from the first to the "
                       "last n and is monotone within stderr",
        "decreasing": rep.decreasing,
        "monotone_within_stderr": rep.monotone_within_stderr,
        "kappa4": rep.kappa4,
    }
    rows = [[str(p.n), str(p.replicas), p.deviation, p.stderr] for p in rep.points]
    return ResultRecord(
        experiment="correction-check", config_hash=chash, seed=cfg["seed"],
        passed=bool(passed), contract=contract,
        payload={"L": matrix_pairs(rep.L),
                 "points": [{"n": p.n, "replicas": p.replicas,
                             "deviation": p.deviation, "stderr": p.stderr}
                            for p in rep.points]},
        csv_header=["n", "replicas", "deviation", "stderr"], csv_rows=rows)


def _decode_variance_target(v):
    if not isinstance(v, dict):
        raise ConfigError("target", "expected an object with kind")
    kind = cfgmod._require(v, "kind", str)
    if kind == "trace_word":
        cfgmod._reject_unknown(v, {"kind", "word"}, "target")
        word = cfgmod._require(v, "word", list)
        if not all(isinstance(g, int) and g >= 1 for g in word):
            raise ConfigError("target.word", "expected generator indices >= 1")
        return TraceWordTarget(tuple(word))
    if kind == "resolvent_entry":
        cfgmod._reject_unknown(v, {"kind", "pencil", "lambda", "slot"}, "target")
        pencil = cfgmod.decode_pencil(cfgmod._require(v, "pencil"), "target.pencil")
        lam = cfgmod.decode_lambda(cfgmod._require(v, "lambda"), pencil.m,
                                   "target.lambda")
        slot = tuple(v.get("slot", [0, 0]))
        return ResolventEntryTarget(pencil=pencil, lam=lam, slot=slot)
    raise ConfigError("target.kind", "must be trace_word or resolvent_entry")


def run_variance_check(cfg, chash, workers):
    target = _decode_variance_target(cfgmod._require(cfg, "target"))
    ensemble = cfgmod.decode_ensemble(cfgmod._require(cfg, "ensemble"))
    n_values = cfgmod.decode_int_list(cfgmod._require(cfg, "n_values"), "n_values")
    replicas = cfgmod.decode_replicas(cfgmod._require(cfg, "replicas"), n_values)
    slope_range = _slope_range(cfg, "slope_range", DEFAULT_VARIANCE_RANGE)
    rep = variance_checks(target, ensemble, n_values, replicas, cfg["seed"],
                          workers=workers)
    passed = rep.all_gated and _in_range(rep.slope, slope_range)
    contract = {"description": "variance decays like n^-2 (slope within range, "
                               "all stderr gates)",
                "slope": rep.slope, "slope_stderr": rep.slope_stderr,
                "slope_range": list(slope_range), "gated": rep.all_gated}
    rows = [[str(p.n), p.value, p.stderr, str(int(p.stderr_ok))] for p in rep.points]
    return ResultRecord(
        experiment="variance-check", config_hash=chash, seed=cfg["seed"],
        passed=bool(passed), contract=contract,
        payload={"points": [{"n": p.n, "variance": p.value, "stderr": p.stderr}
                            for p in rep.points]},
        csv_header=["n", "variance", "stderr", "gate"], csv_rows=rows)


def run_wishart_ibp(cfg, chash, workers):
    n = cfgmod._require(cfg, "n", int)
    p = cfgmod._require(cfg, "p", int)
    if p < n:
        raise ConfigError("p", "need p >= n")
    spec = WishartSpec(n=n, alpha=p / n)
    phi_cfg = cfgmod._require(cfg, "phi", dict)
    cfgmod._reject_unknown(phi_cfg, {"kind", "entry", "z"}, "phi")
    kind = cfgmod._require(phi_cfg, "kind", str)
    entry = tuple(phi_cfg.get("entry", [0, 0]))
    z = cfgmod.decode_complex(phi_cfg.get("z", [0.0, 3.0]), "phi.z")
    try:
        phi = IbpPhi(kind=kind, entry=entry, z=z)
    except ValueError as exc:
        raise ConfigError("phi", str(exc))
    h_entry = tuple(cfgmod._require(cfg, "h_entry", list))
    replicas = cfgmod._require(cfg, "replicas", int)
    validated_only = bool(cfg.get("validated_only", True))
    rep = wishart_ibp_check(spec, phi, h_entry, replicas, cfg["seed"],
                            workers=workers, validated_only=validated_only)
    passed = rep.within_four_stderr
    contract = {"description": "differentiation-identity residual within "
                               "4 stderr of 0",
                "value": complex_pair(rep.value), "stderr": rep.stderr,
                "factor": IBP_STDERR_FACTOR, "validated": rep.validated}
    return ResultRecord(
        experiment="wishart-ibp", config_hash=chash, seed=cfg["seed"],
        passed=bool(passed), contract=contract,
        payload={"value": complex_pair(rep.value), "stderr": rep.stderr,
                 "n": rep.n, "p": rep.p, "replicas": rep.replicas,
                 "validated": rep.validated},
        csv_header=["n", "p", "replicas", "value_re", "value_im", "stderr"],
        csv_rows=[[str(rep.n), str(rep.p), str(rep.replicas),
                   rep.value.real, rep.value.imag, rep.stderr]])


def run_containment(cfg, chash, workers):
    pencil = cfgmod.decode_pencil(cfgmod._require(cfg, "pencil"))
    ensemble = cfgmod.decode_ensemble(cfgmod._require(cfg, "ensemble"))
    n = cfgmod._require(cfg, "n", int)
    epsilon = float(cfgmod._require(cfg, "epsilon", (int, float)))
    seeds = int(cfg.get("seeds", 20))
    rate_req = float(cfg.get("pass_rate", DEFAULT_PASS_RATE))
    support = cfg.get("support")
    if support is not None:
        support = tuple((float(a), float(b)) for a, b in support)
    rep = spectrum_containment(pencil, ensemble, n, epsilon, seeds, cfg["seed"],
                               workers=workers, support=support)
    passed = rep.pass_rate >= rate_req
    contract = {"description": "eigenvalues inside the epsilon-thickened "
                               "predicted support for at least the required "
                               "fraction of seeds",
                "pass_rate": rep.pass_rate, "required": rate_req,
                "epsilon": epsilon, "support": [list(iv) for iv in rep.support]}
    rows = [[str(i), str(int(ok)), lo, hi]
            for i, (ok, (lo, hi)) in enumerate(zip(rep.per_seed, rep.extremes))]
    return ResultRecord(
        experiment="containment", config_hash=chash, seed=cfg["seed"],
        passed=bool(passed), contract=contract,
        payload={"pass_rate": rep.pass_rate,
                 "support": [list(iv) for iv in rep.support]},
        csv_header=["seed_index", "contained", "min_eig", "max_eig"],
        csv_rows=rows)


def _seed_for_point(seed, n):
    return int(np.random.SeedSequence(seed, spawn_key=(int(n),)).generate_state(1)[0])


_RUNNERS = {
    "solve": run_solve,
    "density": run_density,
    "norm-predict": run_norm_predict,
    "converge": run_converge,
    "master-check-iid": run_master_iid,
    "master-check-wishart": run_master_wishart,
    "correction-check": run_correction_check,
    "variance-check": run_variance_check,
    "wishart-ibp": run_wishart_ibp,
    "containment": run_containment,
}


# -- describe ------------------------------------------------------------------

_DEFAULTS_TABLE = f"""default tolerances and knobs
  solver residual tol        {DEFAULT_SOLVE_TOL}
  density y levels           {DEFAULT_Y_LEVELS}
  density support threshold  {DEFAULT_THRESHOLD}
  density edge ladder floor  {DEFAULT_EDGE_FLOOR}
  norm prediction tol        {DEFAULT_NORM_TOL}
  n^-2 slope window          {list(DEFAULT_WITH_RANGE)}
  n^-1 slope window          {list(DEFAULT_WITHOUT_RANGE)}
  containment pass rate      {DEFAULT_PASS_RATE}
  ibp stderr factor          {IBP_STDERR_FACTOR}
  stderr reporting gate      stderr < value / 3"""

_DESCRIPTIONS = {
    "solve": """solve: fixed-point solution of the matrix Stieltjes equation.
Claim verified: the limiting transform G satisfies the semicircular equation
sum_i a_i G a_i + (a0 - lambda) + G^-1 = 0 (or its Marchenko-Pastur analogue)
with operator-norm residual below tol.
Contract: converged and residual <= tol (default 1e-10).""",
    "density": """density: Stieltjes inversion on a grid.
Claim verified: -Im g(x+iy)/pi extrapolated to y -> 0 recovers the spectral
density; detected support intervals have bisection-refined endpoints.
Contract: the density integrates to 1 within 0.02.""",
    "norm-predict": """norm-predict: predicted operator norm of a polynomial in the
free generators, via the linearization pencil's output-corner density.
Contract: |prediction - expected| <= expected_tol when an expected value is given.""",
    "converge": """converge: strong-convergence experiment.  Sampled operator norms
||p(X_n)|| approach the predicted limiting norm as n grows.
Contract: median |norm - prediction| non-increasing in n (ties within stderr),
plus an optional bound at the largest n.""",
    "master-check-iid": """master-check-iid: finite-n master-equation residual for iid
Wigner ensembles.  The residual of sum_p a_p G_n a_p G_n + (a0-lambda) G_n + 1
including the kappa4 correction term R_n/n decays like n^-2; without R_n/n it
only decays like n^-1 when kappa4 != 0.  The n^-2 component is measured through
the replica covariance (an exact identity for Gaussian entries, where the
residual equals minus the covariance term); direct residuals are reported with
jackknife stderr and must agree within 4 stderr.
Contract: slope windows [-2.6,-1.4] (with R_n/n) and [-1.6,-0.6] (without),
with the stderr < value/3 gate on every asserted point.""",
    "master-check-wishart": """master-check-wishart: finite-n master-equation residual for
Wishart ensembles: -a0 G_n + lambda G_n - (p/n) sum_l (1 - a_l G_n)^-1 a_l G_n - 1
decays like n^-2.  Requires the invertibility branch ||Im(lambda)^-1|| <
1/(2 max ||a_l||) or invertible coefficients; the report records which branch.
Contract: slope in [-2.6,-1.4] when all points pass the stderr gate; later
points must stay within factor*(stderr + c/n^2) of the first point's constant.""",
    "correction-check": """correction-check: the 1/n correction.  n (G_n - G) approaches
L(lambda) computed from the kappa4 correction pair, so || n(G_n - G) - L ||
shrinks as n grows.
Contract: the deviation decreases from the first to the last n and is
monotone within stderr.""",
    "variance-check": """variance-check: concentration at rate n^-2.  The variance of a
normalized trace word tr_n(X_i1 ... X_id) or of a resolvent-trace entry decays
like n^-2 (Poincare-inequality tensorization).
Contract: log-log slope in [-2.6,-1.4] with all stderr gates.""",
    "wishart-ibp": """wishart-ibp: Monte Carlo check of the Wishart differentiation
identity E[Phi'(Y).H] - n E[Phi(Y) Tr(H)] + (p-n) E[Phi(Y) Tr(Y^-1 H)] = 0
for Phi in {Tr(YA), (z-Y)^-1_jk with Im z >= 1}, Phi(0) subtracted.
Requires p >= n+2 (inverse-moment integrability); p in {n, n+1} runs are
flagged unvalidated.
Contract: |value| <= 4 stderr.""",
    "containment": """containment: spectrum confinement.  All eigenvalues of the
sampled block operator lie in the epsilon-thickened predicted support.
Contract: pass rate over seeds >= required rate (default 0.95).""",
}


def describe(name):
    if name not in _DESCRIPTIONS:
        raise ConfigError("experiment",
                          f"unknown experiment {name!r}; valid: "
                          f"{', '.join(sorted(_DESCRIPTIONS))}")
    return _DESCRIPTIONS[name] + "\n\n" + _DEFAULTS_TABLE


# -- entry point -----------------------------------------------------------------

def _resolve_workers(args):
    if args.workers is not None:
        return args.workers
    env = os.environ.get("FREECONV_WORKERS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ConfigError("FREECONV_WORKERS", f"not an integer: {env!r}")
    return os.cpu_count() or 1


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="freeconv",
        description="Spectral predictions and random-matrix verification experiments.")
    parser.add_argument("experiment",
                        help="experiment name, or 'describe' followed by a name")
    parser.add_argument("name", nargs="?", help="experiment name for describe")
    parser.add_argument("--config", help="path to the JSON config file")
    parser.add_argument("--seed", type=int, default=None, help="override config seed")
    parser.add_argument("--workers", type=int, default=None,
                        help="worker processes (default: cores, or FREECONV_WORKERS)")
    parser.add_argument("--out", default=".", help="output directory")
    args = parser.parse_args(argv)

    try:
        if args.experiment == "describe":
            if not args.name:
                raise ConfigError("describe", "usage: freeconv describe <experiment>")
            print(describe(args.name))
            return 0
        if args.config is None:
            raise ConfigError("config", "--config FILE is required")
        try:
            with open(args.config) as fh:
                raw = json.load(fh)
        except OSError as exc:
            raise ConfigError("config", f"cannot read {args.config}: {exc}")
        except json.JSONDecodeError as exc:
            raise ConfigError("config", f"invalid JSON: {exc}")
        if "experiment" in raw and raw["experiment"] != args.experiment:
            raise ConfigError("experiment",
                              f"config says {raw['experiment']!r} but the command "
                              f"line says {args.experiment!r}")
        raw["experiment"] = args.experiment
        if args.seed is not None:
            raw["seed"] = args.seed
        exp, cfg = validate_config(raw)
        chash = config_hash(cfg)
        workers = _resolve_workers(args)
        t0 = time.perf_counter()
        record = _RUNNERS[exp](cfg, chash, workers)
        record.wall_clock_s = time.perf_counter() - t0
        json_path, csv_path = record.write(args.out)
        status = "PASS" if record.passed else "FAIL"
        print(f"{exp} [{chash}] {status} ({record.wall_clock_s:.1f}s)")
        print(f"  {json_path}\n  {csv_path}")
        return 0 if record.passed else 2
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # solver failures, preconditions from inner modules
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
